#include "hopfmargin/linearize.hpp"

#include <cmath>

#include "hopfmargin/error.hpp"
#include "hopfmargin/hyperdual.hpp"

namespace hopfmargin {

namespace {

struct Seeded {
  std::vector<HyperDual> x;
  ParamArray<HyperDual> p;
  std::vector<HyperDual> out;
};

Seeded lift(const StateVector& x, const ParameterSet& params) {
  Seeded s;
  s.x.assign(x.data(), x.data() + x.size());
  for (std::size_t k = 0; k < kParamCount; ++k) s.p[k] = HyperDual(params.values()[k]);
  s.out.resize(x.size());
  return s;
}

void evaluate(Seeded& s, LineModel line) {
  detail::rhs_generic<HyperDual>(std::span<const HyperDual>(s.x), s.p, line, std::span<HyperDual>(s.out));
  for (const auto& v : s.out) {
    if (!isfinite(v)) throw Error(ErrorKind::NonFiniteDerivative, "derivative evaluation produced NaN/Inf");
  }
}

void check_inputs(const StateVector& x, const ParameterSet& params, LineModel line) {
  // Plain evaluation validates dimension and finiteness.
  (void)rhs(x, params, line);
}

}  // namespace

Eigen::MatrixXd Tensor3::contract_last(const Eigen::VectorXd& a) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d0_), static_cast<Eigen::Index>(d1_));
  for (std::size_t i = 0; i < d0_; ++i)
    for (std::size_t j = 0; j < d1_; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d2_; ++k) acc += (*this)(i, j, k) * a[static_cast<Eigen::Index>(k)];
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
  return m;
}

Eigen::MatrixXd Tensor3::slice_last(std::size_t k) const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(d0_), static_cast<Eigen::Index>(d1_));
  for (std::size_t i = 0; i < d0_; ++i)
    for (std::size_t j = 0; j < d1_; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j, k);
  return m;
}

Eigen::MatrixXd jacobian(const StateVector& x, const ParameterSet& params, LineModel line) {
  check_inputs(x, params, line);
  const auto n = x.size();
  Eigen::MatrixXd J(n, n);
  Seeded s = lift(x, params);
  for (Eigen::Index j = 0; j < n; ++j) {
    s.x[j].b = 1.0;
    evaluate(s, line);
    for (Eigen::Index i = 0; i < n; ++i) J(i, j) = s.out[i].b;
    s.x[j].b = 0.0;
  }
  return J;
}

Eigen::MatrixXd parameter_jacobian(const StateVector& x, const ParameterSet& params, LineModel line) {
  check_inputs(x, params, line);
  const auto n = x.size();
  Eigen::MatrixXd J(n, static_cast<Eigen::Index>(kParamCount));
  Seeded s = lift(x, params);
  for (std::size_t k = 0; k < kParamCount; ++k) {
    s.p[k].b = 1.0;
    evaluate(s, line);
    for (Eigen::Index i = 0; i < n; ++i) J(i, static_cast<Eigen::Index>(k)) = s.out[i].b;
    s.p[k].b = 0.0;
  }
  return J;
}

LinearizationBundle linearize(const StateVector& x, const ParameterSet& params, LineModel line) {
  LinearizationBundle bundle;
  bundle.x = x;
  bundle.params = params;
  bundle.line = line;
  bundle.f_x = jacobian(x, params, line);
  bundle.f_lambda = parameter_jacobian(x, params, line);

  const auto n = static_cast<std::size_t>(x.size());
  bundle.f_xx = Tensor3(n, n, n);
  bundle.f_xlambda = Tensor3(n, n, kParamCount);

  Seeded s = lift(x, params);
  for (std::size_t j = 0; j < n; ++j) {
    s.x[j].b = 1.0;
    for (std::size_t l = j; l < n; ++l) {
      s.x[l].c = 1.0;
      evaluate(s, line);
      for (std::size_t i = 0; i < n; ++i) {
        bundle.f_xx(i, j, l) = s.out[i].d;
        bundle.f_xx(i, l, j) = s.out[i].d;
      }
      s.x[l].c = 0.0;
    }
    for (std::size_t k = 0; k < kParamCount; ++k) {
      s.p[k].c = 1.0;
      evaluate(s, line);
      for (std::size_t i = 0; i < n; ++i) bundle.f_xlambda(i, j, k) = s.out[i].d;
      s.p[k].c = 0.0;
    }
    s.x[j].b = 0.0;
  }
  return bundle;
}

}  // namespace hopfmargin
