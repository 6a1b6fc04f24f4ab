#include "hopfmargin/model.hpp"

#include <cmath>
#include <string>

#include "hopfmargin/error.hpp"

namespace hopfmargin {

namespace {

constexpr std::array<std::string_view, 13> kStateNames{
    "p_tilde", "q_tilde", "theta", "beta_d", "beta_q", "gamma_d", "gamma_q",
    "v_cD",    "v_cQ",    "i_td",  "i_tq",   "i_gD",   "i_gQ",
};

void check_state(const StateVector& x, LineModel line) {
  if (static_cast<std::size_t>(x.size()) != state_dimension(line)) {
    throw Error(ErrorKind::DimensionMismatch,
                "state has " + std::to_string(x.size()) + " entries, " + std::string(to_string(line)) +
                    " line expects " + std::to_string(state_dimension(line)));
  }
  if (!x.allFinite()) throw Error(ErrorKind::NonFiniteInput, "state contains a non-finite entry");
}

}  // namespace

std::string_view to_string(LineModel line) { return line == LineModel::Static ? "static" : "dynamic"; }

LineModel line_from_string(std::string_view text) {
  if (text == "static") return LineModel::Static;
  if (text == "dynamic") return LineModel::Dynamic;
  throw Error(ErrorKind::ConfigError, "line must be 'static' or 'dynamic', got '" + std::string(text) + "'");
}

std::string_view name(State s) { return kStateNames[index(s)]; }

std::array<double, 2> rotate_dq(double theta, std::array<double, 2> v) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * v[0] - s * v[1], s * v[0] + c * v[1]};
}

StateVector rhs(const StateVector& x, const ParameterSet& params, LineModel line) {
  check_state(x, line);
  for (double v : params.values()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "parameter is not finite");
  }
  StateVector dx(x.size());
  detail::rhs_generic<double>(std::span<const double>(x.data(), x.size()), params.values(), line,
                              std::span<double>(dx.data(), dx.size()));
  return dx;
}

Outputs outputs(const StateVector& x, const ParameterSet& params, LineModel line) {
  check_state(x, line);
  Outputs o;
  const double v_cD = x[index(State::v_cD)];
  const double v_cQ = x[index(State::v_cQ)];
  if (line == LineModel::Static) {
    const double z2 = params.impedance_squared();
    const double dD = v_cD - params[Param::v_gD];
    const double dQ = v_cQ - params[Param::v_gQ];
    o.i_gD = (params[Param::R] * dD + params[Param::X] * dQ) / z2;
    o.i_gQ = (params[Param::R] * dQ - params[Param::X] * dD) / z2;
  } else {
    o.i_gD = x[index(State::i_gD)];
    o.i_gQ = x[index(State::i_gQ)];
  }
  // Power products are invariant under the common rotation to the local frame.
  o.p = v_cD * o.i_gD + v_cQ * o.i_gQ;
  o.q = v_cQ * o.i_gD - v_cD * o.i_gQ;
  o.vc_magnitude = std::hypot(v_cD, v_cQ);
  return o;
}

}  // namespace hopfmargin
