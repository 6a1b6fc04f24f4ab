#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "hopfmargin/model.hpp"
#include "hopfmargin/params.hpp"

namespace hopfmargin {

/// Dense rank-3 array indexed (i, j, k), used for f_xx and f_xlambda.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t d0, std::size_t d1, std::size_t d2) : d0_(d0), d1_(d1), d2_(d2), data_(d0 * d1 * d2, 0.0) {}

  double& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * d1_ + j) * d2_ + k]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const { return data_[(i * d1_ + j) * d2_ + k]; }

  std::size_t dim0() const { return d0_; }
  std::size_t dim1() const { return d1_; }
  std::size_t dim2() const { return d2_; }

  /// Contracts the last index with `a`: result(i, j) = sum_k T(i, j, k) a(k).
  Eigen::MatrixXd contract_last(const Eigen::VectorXd& a) const;
  /// Fixes the last index: result(i, j) = T(i, j, k).
  Eigen::MatrixXd slice_last(std::size_t k) const;

 private:
  std::size_t d0_ = 0, d1_ = 0, d2_ = 0;
  std::vector<double> data_;
};

/// f_x (n x n), f_lambda (n x m), f_xx(i, j, l) = d2 f_i / dx_j dx_l and
/// f_xlambda(i, j, k) = d2 f_i / dx_j dlambda_k, all at (x, lambda).
struct LinearizationBundle {
  StateVector x;
  ParameterSet params;
  LineModel line = LineModel::Static;
  Eigen::MatrixXd f_x;
  Eigen::MatrixXd f_lambda;
  Tensor3 f_xx;
  Tensor3 f_xlambda;
};

/// Exact state Jacobian, computed with dual-number seeding.
Eigen::MatrixXd jacobian(const StateVector& x, const ParameterSet& params, LineModel line);

/// Exact parameter Jacobian f_lambda (n x 22).
Eigen::MatrixXd parameter_jacobian(const StateVector& x, const ParameterSet& params, LineModel line);

/// All first and second derivatives. Throws NonFiniteDerivative.
LinearizationBundle linearize(const StateVector& x, const ParameterSet& params, LineModel line);

}  // namespace hopfmargin
