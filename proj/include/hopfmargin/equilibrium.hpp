#pragma once

#include <iosfwd>
#include <vector>

#include "hopfmargin/model.hpp"
#include "hopfmargin/params.hpp"

namespace hopfmargin {

struct NewtonOptions {
  int max_iterations = 50;
  double residual_tolerance = 1e-10;
  /// Armijo sufficient-decrease constant on ||f||^2.
  double armijo = 1e-4;
  double backtrack_factor = 0.5;
  double min_damping = 1e-4;
};

struct EquilibriumResult {
  StateVector state;
  double residual_norm = 0.0;  // infinity norm of rhs
  bool converged = false;
  int iterations = 0;
};

/// Flat start: filtered powers at their setpoints, theta from the lossless
/// power-angle relation, unit-magnitude capacitor voltage, currents from the
/// static line equations.
StateVector flat_start(const ParameterSet& params, LineModel line);

/// Damped Newton on rhs. Throws SingularJacobian or NoConvergence.
EquilibriumResult solve_equilibrium(const ParameterSet& params, LineModel line, const StateVector& guess,
                                    const NewtonOptions& options = {});

inline EquilibriumResult solve_equilibrium(const ParameterSet& params, LineModel line) {
  return solve_equilibrium(params, line, flat_start(params, line));
}

/// Wraps theta into (-pi, pi].
double wrap_angle(double theta);

struct StepPolicy {
  double initial_step = 0.0;  // 0 selects 2% of the starting value (floor min_step * 1e3)
  double min_step = 1e-9;
  double max_step = 0.0;  // 0 means unbounded
  double growth = 1.5;
};

struct Branch {
  Param parameter = Param::X;
  std::vector<double> values;
  std::vector<EquilibriumResult> points;
};

/// Natural-parameter continuation from params[parameter] to `target`, halving
/// the step on Newton failure. Throws BranchLost when the step underflows.
Branch continue_equilibrium(const ParameterSet& params, LineModel line, Param parameter, double target,
                            const StepPolicy& policy = {}, const NewtonOptions& options = {});

void write_branch_csv(std::ostream& out, const Branch& branch, LineModel line);

}  // namespace hopfmargin
