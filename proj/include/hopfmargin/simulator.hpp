#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hopfmargin/model.hpp"
#include "hopfmargin/params.hpp"

namespace hopfmargin {

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0 picks an automatic first step
  double max_step = 0.0;      // 0 means unbounded
  long max_steps = 50'000'000;
  /// Integration stops early once the state norm exceeds this.
  double blowup_norm = 1e6;
};

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
  bool stopped_on_blowup = false;
};

using OdeFunction = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

/// Dormand-Prince 5(4) embedded pair with the standard 4th-order dense output.
/// Returns the solution at each requested output time (ascending, within
/// [t0, t_end]). Throws StepUnderflow and NonFiniteState.
std::vector<Eigen::VectorXd> integrate_ode(const OdeFunction& f, double t0, const Eigen::VectorXd& y0,
                                           const std::vector<double>& output_times, const IntegratorOptions& options,
                                           IntegratorStats* stats = nullptr);

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<double> p;
  std::vector<double> vc_magnitude;
  bool stopped_on_blowup = false;
};

/// Integrates the inverter model from x0 over [t_span.first, t_span.second],
/// sampling every `dt` seconds.
Trajectory integrate(const StateVector& x0, const ParameterSet& params, LineModel line,
                     std::pair<double, double> t_span, double dt, const IntegratorOptions& options = {});

enum class TrajectoryClass { Converged, Oscillating, Diverged };

std::string_view to_string(TrajectoryClass c);

struct Classification {
  TrajectoryClass kind = TrajectoryClass::Converged;
  double amplitude = 0.0;                // max |p - mean| over the terminal window
  std::optional<double> frequency;       // rad/s, from zero crossings (Oscillating only)
};

inline constexpr double kConvergedAmplitude = 1e-6;
inline constexpr double kDivergedNorm = 1e3;

/// Classifies by the terminal window of p(t). Throws WindowTooLong when the
/// trajectory spans no more than two windows.
Classification classify(const Trajectory& trajectory, double window);

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, LineModel line);

}  // namespace hopfmargin
