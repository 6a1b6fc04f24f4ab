#include "hopfmargin/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "hopfmargin/error.hpp"
#include "hopfmargin/linearize.hpp"
#include "hopfmargin/report.hpp"

namespace hopfmargin {

double wrap_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta, two_pi);
  if (t <= -std::numbers::pi) t += two_pi;
  if (t > std::numbers::pi) t -= two_pi;
  return t;
}

StateVector flat_start(const ParameterSet& params, LineModel line) {
  params.validate();
  StateVector x = StateVector::Zero(static_cast<Eigen::Index>(state_dimension(line)));
  const double v0 = params[Param::V0];
  const double vg = std::hypot(params[Param::v_gD], params[Param::v_gQ]);
  const double sin_theta = std::clamp(params[Param::p_star] * params[Param::X] / (v0 * vg), -1.0, 1.0);
  const double theta = std::asin(sin_theta) + std::atan2(params[Param::v_gQ], params[Param::v_gD]);

  x[index(State::p_tilde)] = params[Param::p_star];
  x[index(State::q_tilde)] = params[Param::q_star];
  x[index(State::theta)] = theta;
  const auto vc = rotate_dq(theta, {v0, 0.0});
  x[index(State::v_cD)] = vc[0];
  x[index(State::v_cQ)] = vc[1];

  const double z2 = params.impedance_squared();
  const double dD = vc[0] - params[Param::v_gD];
  const double dQ = vc[1] - params[Param::v_gQ];
  const double i_gD = (params[Param::R] * dD + params[Param::X] * dQ) / z2;
  const double i_gQ = (params[Param::R] * dQ - params[Param::X] * dD) / z2;
  const auto it_local = rotate_dq(-theta, {i_gD, i_gQ});
  x[index(State::i_td)] = it_local[0];
  x[index(State::i_tq)] = it_local[1];
  if (line == LineModel::Dynamic) {
    x[index(State::i_gD)] = i_gD;
    x[index(State::i_gQ)] = i_gQ;
  }
  return x;
}

EquilibriumResult solve_equilibrium(const ParameterSet& params, LineModel line, const StateVector& guess,
                                    const NewtonOptions& options) {
  params.validate();
  EquilibriumResult result;
  StateVector x = guess;
  StateVector f = rhs(x, params, line);
  double merit = f.squaredNorm();

  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;
    if (f.lpNorm<Eigen::Infinity>() <= options.residual_tolerance) {
      result.converged = true;
      break;
    }
    if (iter == options.max_iterations) break;

    const Eigen::MatrixXd J = jacobian(x, params, line);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    const StateVector step = lu.solve(-f);
    if (!step.allFinite() || lu.rcond() < 1e-14) {
      throw Error(ErrorKind::SingularJacobian, "Newton step undefined (rcond " + std::to_string(lu.rcond()) + ")");
    }

    double t = 1.0;
    StateVector trial;
    StateVector f_trial;
    while (true) {
      trial = x + t * step;
      f_trial = rhs(trial, params, line);
      const double m = f_trial.squaredNorm();
      if (m <= (1.0 - 2.0 * options.armijo * t) * merit || t * options.backtrack_factor < options.min_damping) break;
      t *= options.backtrack_factor;
    }
    x = std::move(trial);
    f = std::move(f_trial);
    merit = f.squaredNorm();
    if (!std::isfinite(merit)) throw Error(ErrorKind::NoConvergence, "Newton iterate became non-finite");
  }

  result.residual_norm = f.lpNorm<Eigen::Infinity>();
  if (!result.converged) {
    throw Error(ErrorKind::NoConvergence,
                "residual " + std::to_string(result.residual_norm) + " after " +
                    std::to_string(options.max_iterations) + " iterations");
  }
  x[index(State::theta)] = wrap_angle(x[index(State::theta)]);
  result.state = std::move(x);
  return result;
}

Branch continue_equilibrium(const ParameterSet& params, LineModel line, Param parameter, double target,
                            const StepPolicy& policy, const NewtonOptions& options) {
  Branch branch;
  branch.parameter = parameter;
  ParameterSet current = params;
  double value = params[parameter];

  EquilibriumResult start = solve_equilibrium(current, line);
  branch.values.push_back(value);
  branch.points.push_back(start);

  const double span = target - value;
  if (span == 0.0) return branch;
  const double direction = span > 0.0 ? 1.0 : -1.0;
  double step = policy.initial_step > 0.0 ? policy.initial_step
                                          : std::max(0.02 * std::abs(value), policy.min_step * 1e3);
  if (policy.max_step > 0.0) step = std::min(step, policy.max_step);

  StateVector previous = start.state;
  while (direction * (target - value) > 0.0) {
    const double next = direction > 0.0 ? std::min(value + step, target) : std::max(value - step, target);
    try {
      EquilibriumResult r = solve_equilibrium(current.with(parameter, next), line, previous, options);
      value = next;
      current.set(parameter, value);
      // Keep theta continuous along the branch for the next guess.
      StateVector guess = r.state;
      guess[index(State::theta)] = previous[index(State::theta)] +
                                   wrap_angle(r.state[index(State::theta)] - previous[index(State::theta)]);
      previous = guess;
      branch.values.push_back(value);
      branch.points.push_back(std::move(r));
      step *= policy.growth;
      if (policy.max_step > 0.0) step = std::min(step, policy.max_step);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoConvergence && e.kind() != ErrorKind::SingularJacobian) throw;
      step *= 0.5;
      if (step < policy.min_step) {
        throw Error(ErrorKind::BranchLost, std::string(name(parameter)) + " branch lost near " + std::to_string(value));
      }
    }
  }
  return branch;
}

void write_branch_csv(std::ostream& out, const Branch& branch, LineModel line) {
  out << name(branch.parameter);
  for (std::size_t i = 0; i < state_dimension(line); ++i) out << ',' << name(static_cast<State>(i));
  out << '\n';
  for (std::size_t r = 0; r < branch.values.size(); ++r) {
    out << format_number(branch.values[r]);
    const auto& s = branch.points[r].state;
    for (Eigen::Index i = 0; i < s.size(); ++i) out << ',' << format_number(s[i]);
    out << '\n';
  }
}

}  // namespace hopfmargin
