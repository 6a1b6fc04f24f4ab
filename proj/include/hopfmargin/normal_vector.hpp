#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hopfmargin/hopf.hpp"
#include "hopfmargin/linearize.hpp"
#include "hopfmargin/params.hpp"

namespace hopfmargin {

/// Gradient of Re(mu) with respect to all parameters along the equilibrium
/// branch: Re{ w^H (-f_xx f_x^{-1} f_lambda + f_xlambda) v }. Unscaled.
/// Throws SingularAtBifurcation when f_x cannot be factored.
Eigen::VectorXd raw_normal(const HopfPoint& hopf);
Eigen::VectorXd raw_normal(const HopfPoint& hopf, const LinearizationBundle& bundle);

/// Unit normal to the Hopf hypersurface, oriented so that moving along +N
/// increases Re(mu). Throws DegenerateNormal when the raw norm is below 1e-12.
Eigen::VectorXd normal_vector(const HopfPoint& hopf);

/// Normalizes an arbitrary nonzero multiple of the raw normal.
Eigen::VectorXd normalize_normal(const Eigen::VectorXd& scaled_raw, const Eigen::VectorXd& orientation);

/// Shift of the bifurcation value of `cause` per unit change of `control`,
/// -N_C / N_I. Equals -1 for control == cause. Throws TangentialDirection.
double bifurcation_sensitivity(const Eigen::VectorXd& normal, Param cause, Param control);

/// Margin sensitivity -[k^T N]^{-1} N_C with k = sign(direction) e_cause:
/// the first-order change of |lambda*_I - lambda0_I| per unit of `control`.
double margin_sensitivity(const Eigen::VectorXd& normal, Param cause, Direction direction, Param control);

/// Margin sensitivity for a general direction k in parameter space.
Eigen::VectorXd margin_sensitivity(const Eigen::VectorXd& normal, const Eigen::VectorXd& k);

/// Converts a per-unit sensitivity d(cause)/d(control) to display units
/// (percent for the droop gains), the scale used for ranking controls.
double display_sensitivity(double sensitivity, Param cause, Param control);

/// First-order predicted margin after changing the control parameter by delta_control.
double estimate_margin(double old_margin, double margin_sens, double delta_control);

struct SensitivityRow {
  Param cause;
  std::optional<Direction> direction;
  /// Missing when the cause parameter has no Hopf point.
  std::optional<std::vector<double>> sensitivities;  // one per parameter, -N_C / N_I in display units
  std::optional<std::vector<double>> normalized;     // row divided by max |entry|
  std::optional<Param> best_control;                 // argmax |s| over controllable C != I
  std::optional<double> best_value;
  std::optional<double> hopf_value;
  std::string failure;  // reason when missing
};

struct SensitivityReport {
  LineModel line = LineModel::Static;
  std::vector<SensitivityRow> rows;
};

/// Parameters that label the rows of the sensitivity matrix, in report order.
const std::vector<Param>& instability_parameters();

/// Best controllable parameter for a row, excluding the cause itself.
std::optional<Param> best_control(const std::vector<double>& row, Param cause);

/// Locates the Hopf point for every instability parameter and assembles the
/// sensitivity matrix. Rows are computed in parallel on `threads` workers.
SensitivityReport full_sensitivity_matrix(const ParameterSet& nominal, LineModel line, unsigned threads = 1);

}  // namespace hopfmargin
