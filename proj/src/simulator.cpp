#include "hopfmargin/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "hopfmargin/error.hpp"
#include "hopfmargin/report.hpp"

namespace hopfmargin {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output (Shampine).
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                  const IntegratorOptions& o) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale = o.atol + o.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    acc += (err[i] / scale) * (err[i] / scale);
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

}  // namespace

std::vector<Eigen::VectorXd> integrate_ode(const OdeFunction& f, double t0, const Eigen::VectorXd& y0,
                                           const std::vector<double>& output_times, const IntegratorOptions& options,
                                           IntegratorStats* stats) {
  if (!y0.allFinite()) throw Error(ErrorKind::NonFiniteState, "initial state is not finite");
  std::vector<Eigen::VectorXd> out;
  out.reserve(output_times.size());
  if (output_times.empty()) return out;
  const double t_end = output_times.back();

  IntegratorStats local;
  IntegratorStats& st = stats ? *stats : local;

  const auto n = y0.size();
  Eigen::VectorXd y = y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y1(n), tmp(n), err(n);
  f(t0, y, k1);
  ++st.evaluations;

  std::size_t next_out = 0;
  while (next_out < output_times.size() && output_times[next_out] <= t0) out.push_back(y), ++next_out;

  double t = t0;
  double h = options.initial_step;
  if (h <= 0.0) {
    const double scale_y = (y.cwiseAbs() * options.rtol).array().max(options.atol).matrix().norm();
    const double scale_f = k1.norm();
    h = scale_f > 0.0 ? 0.01 * scale_y / (scale_f * options.rtol) : 1e-6;
    h = std::clamp(h, 1e-10, std::max(1e-10, 0.01 * (t_end - t0)));
  }

  while (next_out < output_times.size()) {
    if (st.accepted + st.rejected >= options.max_steps) throw Error(ErrorKind::StepUnderflow, "step budget exhausted");
    if (options.max_step > 0.0) h = std::min(h, options.max_step);
    if (t + h > t_end) h = t_end - t;
    if (h < 1e-14 * std::max(1.0, std::abs(t))) {
      throw Error(ErrorKind::StepUnderflow, "step size underflow at t = " + std::to_string(t));
    }

    tmp = y + h * a21 * k1;
    f(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, tmp, k6);
    y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(t + h, y1, k7);
    st.evaluations += 6;

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, y, y1, options);
    if (!std::isfinite(en)) {
      if (!y1.allFinite() && h < 1e-12) throw Error(ErrorKind::NonFiniteState, "state became non-finite");
      h *= 0.1;
      ++st.rejected;
      continue;
    }
    if (en > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      ++st.rejected;
      continue;
    }

    // Accepted: emit dense output for requested times inside (t, t + h].
    const double t_new = t + h;
    const Eigen::VectorXd r2 = y1 - y;
    const Eigen::VectorXd r3 = h * k1 - r2;
    const Eigen::VectorXd r4 = r2 - h * k7 - r3;
    const Eigen::VectorXd r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    while (next_out < output_times.size() && output_times[next_out] <= t_new) {
      const double s = (output_times[next_out] - t) / h;
      const double s1 = 1.0 - s;
      out.push_back(y + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5))));
      ++next_out;
    }

    t = t_new;
    y = y1;
    k1 = k7;
    ++st.accepted;
    if (!y.allFinite()) throw Error(ErrorKind::NonFiniteState, "state became non-finite at t = " + std::to_string(t));
    if (y.norm() > options.blowup_norm) {
      st.stopped_on_blowup = true;
      break;
    }
    h *= std::min(10.0, 0.9 * std::pow(std::max(en, 1e-10), -0.2));
  }
  return out;
}

Trajectory integrate(const StateVector& x0, const ParameterSet& params, LineModel line,
                     std::pair<double, double> t_span, double dt, const IntegratorOptions& options) {
  (void)rhs(x0, params, line);  // validates dimension and finiteness
  if (!(dt > 0.0) || !(t_span.second > t_span.first)) {
    throw Error(ErrorKind::InvalidParameter, "time span must be increasing and dt positive");
  }
  if (!(options.rtol > 0.0)) throw Error(ErrorKind::InvalidParameter, "tolerance must be positive");

  std::vector<double> times;
  const auto steps = static_cast<long>(std::floor((t_span.second - t_span.first) / dt + 1e-9));
  times.reserve(static_cast<std::size_t>(steps) + 2);
  for (long k = 0; k <= steps; ++k) times.push_back(t_span.first + static_cast<double>(k) * dt);
  if (t_span.second - times.back() > 1e-12 * dt) times.push_back(t_span.second);

  const auto n = x0.size();
  const auto& p = params.values();
  OdeFunction f = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
    dydt.resize(n);
    detail::rhs_generic<double>(std::span<const double>(y.data(), n), p, line, std::span<double>(dydt.data(), n));
  };

  IntegratorStats stats;
  Trajectory traj;
  traj.states = integrate_ode(f, t_span.first, x0, times, options, &stats);
  traj.stopped_on_blowup = stats.stopped_on_blowup;
  traj.times.assign(times.begin(), times.begin() + static_cast<long>(traj.states.size()));
  for (const auto& s : traj.states) {
    const Outputs o = outputs(s, params, line);
    traj.p.push_back(o.p);
    traj.vc_magnitude.push_back(o.vc_magnitude);
  }
  return traj;
}

std::string_view to_string(TrajectoryClass c) {
  switch (c) {
    case TrajectoryClass::Converged: return "converged";
    case TrajectoryClass::Oscillating: return "oscillating";
    case TrajectoryClass::Diverged: return "diverged";
  }
  return "";
}

Classification classify(const Trajectory& trajectory, double window) {
  Classification c;
  for (const auto& s : trajectory.states) {
    if (!s.allFinite() || s.norm() > kDivergedNorm) {
      c.kind = TrajectoryClass::Diverged;
      c.amplitude = std::numeric_limits<double>::infinity();
      return c;
    }
  }
  if (trajectory.stopped_on_blowup) {
    c.kind = TrajectoryClass::Diverged;
    return c;
  }
  if (trajectory.times.size() < 2 || !(window > 0.0) ||
      trajectory.times.back() - trajectory.times.front() <= 2.0 * window) {
    throw Error(ErrorKind::WindowTooLong, "trajectory must span more than two windows");
  }

  const double t_start = trajectory.times.back() - window;
  const auto first = static_cast<std::size_t>(
      std::lower_bound(trajectory.times.begin(), trajectory.times.end(), t_start) - trajectory.times.begin());
  const std::size_t count = trajectory.p.size() - first;
  double mean = 0.0;
  for (std::size_t i = first; i < trajectory.p.size(); ++i) mean += trajectory.p[i];
  mean /= static_cast<double>(count);
  for (std::size_t i = first; i < trajectory.p.size(); ++i) c.amplitude = std::max(c.amplitude, std::abs(trajectory.p[i] - mean));

  if (c.amplitude < kConvergedAmplitude) {
    c.kind = TrajectoryClass::Converged;
    return c;
  }
  c.kind = TrajectoryClass::Oscillating;

  std::vector<double> upward;
  for (std::size_t i = first + 1; i < trajectory.p.size(); ++i) {
    const double a = trajectory.p[i - 1] - mean;
    const double b = trajectory.p[i] - mean;
    if (a < 0.0 && b >= 0.0) {
      const double t0 = trajectory.times[i - 1];
      const double t1 = trajectory.times[i];
      upward.push_back(t0 + (t1 - t0) * (-a) / (b - a));
    }
  }
  if (upward.size() >= 2) {
    const double periods = static_cast<double>(upward.size() - 1);
    c.frequency = 2.0 * std::numbers::pi * periods / (upward.back() - upward.front());
  }
  return c;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, LineModel line) {
  out << "time";
  for (std::size_t i = 0; i < state_dimension(line); ++i) out << ',' << name(static_cast<State>(i));
  out << ",p,vc_magnitude\n";
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    out << format_number(trajectory.times[k]);
    for (Eigen::Index i = 0; i < trajectory.states[k].size(); ++i) out << ',' << format_number(trajectory.states[k][i]);
    out << ',' << format_number(trajectory.p[k]) << ',' << format_number(trajectory.vc_magnitude[k]) << '\n';
  }
}

}  // namespace hopfmargin
