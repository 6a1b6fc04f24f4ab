#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "hopfmargin/params.hpp"

namespace hopfmargin {

enum class LineModel { Static, Dynamic };

std::string_view to_string(LineModel line);
LineModel line_from_string(std::string_view text);

/// Dynamic states. The two line currents exist only for LineModel::Dynamic.
enum class State : std::size_t {
  p_tilde,
  q_tilde,
  theta,
  beta_d,
  beta_q,
  gamma_d,
  gamma_q,
  v_cD,
  v_cQ,
  i_td,
  i_tq,
  i_gD,
  i_gQ,
};

constexpr std::size_t index(State s) { return static_cast<std::size_t>(s); }

constexpr std::size_t state_dimension(LineModel line) { return line == LineModel::Static ? 11 : 13; }

std::string_view name(State s);

using StateVector = Eigen::VectorXd;

/// Applies R(theta) to a dq pair: local dq -> global DQ.
std::array<double, 2> rotate_dq(double theta, std::array<double, 2> v);

/// Right-hand side f(x, lambda). Throws DimensionMismatch / NonFiniteInput.
StateVector rhs(const StateVector& x, const ParameterSet& params, LineModel line);

/// Terminal quantities recomputed from a state.
struct Outputs {
  double p = 0.0;
  double q = 0.0;
  double vc_magnitude = 0.0;
  double i_gD = 0.0;
  double i_gQ = 0.0;
};

Outputs outputs(const StateVector& x, const ParameterSet& params, LineModel line);

namespace detail {

using std::cos;
using std::sin;

/// Closed-form ODE right-hand side, generic over the scalar so the same code
/// serves plain evaluation and hyper-dual differentiation.
template <class T>
void rhs_generic(std::span<const T> x, const ParamArray<T>& p, LineModel line, std::span<T> out) {
  auto P = [&](Param id) -> const T& { return p[index(id)]; };
  auto S = [&](State id) -> const T& { return x[index(id)]; };

  const T& p_tilde = S(State::p_tilde);
  const T& q_tilde = S(State::q_tilde);
  const T& theta = S(State::theta);
  const T& v_cD = S(State::v_cD);
  const T& v_cQ = S(State::v_cQ);
  const T& i_td = S(State::i_td);
  const T& i_tq = S(State::i_tq);

  const T c = cos(theta);
  const T s = sin(theta);

  T i_gD;
  T i_gQ;
  if (line == LineModel::Static) {
    const T z2 = P(Param::R) * P(Param::R) + P(Param::X) * P(Param::X);
    const T g = P(Param::R) / z2;
    const T b = P(Param::X) / z2;
    const T dD = v_cD - P(Param::v_gD);
    const T dQ = v_cQ - P(Param::v_gQ);
    i_gD = g * dD + b * dQ;
    i_gQ = g * dQ - b * dD;
  } else {
    i_gD = S(State::i_gD);
    i_gQ = S(State::i_gQ);
  }

  // Global DQ -> local dq is R(-theta).
  const T i_gd = i_gD * c + i_gQ * s;
  const T i_gq = i_gQ * c - i_gD * s;
  const T v_cd = v_cD * c + v_cQ * s;
  const T v_cq = v_cQ * c - v_cD * s;

  const T p_out = v_cd * i_gd + v_cq * i_gq;
  const T q_out = v_cq * i_gd - v_cd * i_gq;

  const T d_omega = P(Param::K_P) * (P(Param::p_star) - p_tilde);
  const T omega = P(Param::omega0) + d_omega;

  const T v_ref_d = P(Param::V0) + P(Param::K_Q) * (P(Param::q_star) - q_tilde);
  const T v_ref_q = T(0.0);

  const T i_ref_d = P(Param::K_VC_F) * i_gd + P(Param::K_VC_P) * (v_ref_d - v_cd) +
                    P(Param::K_VC_I) * S(State::beta_d) - v_cq * omega * P(Param::C_f);
  const T i_ref_q = P(Param::K_VC_F) * i_gq + P(Param::K_VC_P) * (v_ref_q - v_cq) +
                    P(Param::K_VC_I) * S(State::beta_q) + v_cd * omega * P(Param::C_f);

  const T v_td = P(Param::K_CC_F) * v_cd + P(Param::K_CC_P) * (i_ref_d - i_td) +
                 P(Param::K_CC_I) * S(State::gamma_d) - i_tq * omega * P(Param::L_f);
  const T v_tq = P(Param::K_CC_F) * v_cq + P(Param::K_CC_P) * (i_ref_q - i_tq) +
                 P(Param::K_CC_I) * S(State::gamma_q) + i_td * omega * P(Param::L_f);

  const T i_tD = i_td * c - i_tq * s;
  const T i_tQ = i_td * s + i_tq * c;

  out[index(State::p_tilde)] = P(Param::omega_pc) * (p_out - p_tilde);
  out[index(State::q_tilde)] = P(Param::omega_qc) * (q_out - q_tilde);
  out[index(State::theta)] = P(Param::omega_b) * d_omega;
  out[index(State::beta_d)] = v_ref_d - v_cd;
  out[index(State::beta_q)] = v_ref_q - v_cq;
  out[index(State::gamma_d)] = i_ref_d - i_td;
  out[index(State::gamma_q)] = i_ref_q - i_tq;
  out[index(State::v_cD)] = omega * v_cQ + (i_tD - i_gD) / P(Param::C_f);
  out[index(State::v_cQ)] = -(omega * v_cD) + (i_tQ - i_gQ) / P(Param::C_f);
  // The resistive drop acts on the filter inductor (converter) current.
  out[index(State::i_td)] =
      omega * i_tq + (v_td - v_cd) / P(Param::L_f) - P(Param::R_f) / P(Param::L_f) * i_td;
  out[index(State::i_tq)] =
      -(omega * i_td) + (v_tq - v_cq) / P(Param::L_f) - P(Param::R_f) / P(Param::L_f) * i_tq;

  if (line == LineModel::Dynamic) {
    // Infinite bus: the steady-state frequency is omega0, expressed in rad/s.
    const T omega_ss = P(Param::omega0) * P(Param::omega_b);
    const T inductance = P(Param::X) / P(Param::omega0);
    out[index(State::i_gD)] = omega_ss / inductance * (v_cD - P(Param::v_gD)) -
                              P(Param::R) / inductance * omega_ss * i_gD +
                              P(Param::omega0) * omega_ss * i_gQ;
    out[index(State::i_gQ)] = omega_ss / inductance * (v_cQ - P(Param::v_gQ)) -
                              P(Param::R) / inductance * omega_ss * i_gQ -
                              P(Param::omega0) * omega_ss * i_gD;
  }
}

}  // namespace detail

}  // namespace hopfmargin
