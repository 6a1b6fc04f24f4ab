#include "hopfmargin/hopf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hopfmargin/error.hpp"
#include "hopfmargin/linearize.hpp"

namespace hopfmargin {

namespace {

bool is_complex(std::complex<double> mu) { return std::abs(mu.imag()) > 1e-9 * (1.0 + std::abs(mu)); }

struct Probe {
  double value = 0.0;
  StateVector x;
  Spectrum spectrum;
  double tau = 0.0;
};

Probe probe(const ParameterSet& params, LineModel line, Param p, double value, const StateVector& guess) {
  Probe pr;
  pr.value = value;
  const ParameterSet at = params.with(p, value);
  pr.x = solve_equilibrium(at, line, guess).state;
  pr.spectrum = eigen_analysis(pr.x, at, line);
  pr.tau = pr.spectrum.tau();
  return pr;
}

std::string describe(Param p, double value) { return std::string(name(p)) + " = " + std::to_string(value); }

// First real eigenvalue to reach the right half-plane ends the scan: that is
// not a Hopf crossing.
void reject_real_crossing(const Probe& pr, Param p) {
  for (const auto& mu : pr.spectrum.eigenvalues) {
    if (!is_complex(mu) && mu.real() > 0.0) {
      throw Error(ErrorKind::NoBifurcation, "real eigenvalue crossed before any complex pair at " + describe(p, pr.value));
    }
  }
}

HopfPoint finalize(const ParameterSet& params, LineModel line, Param p, Direction dir, const Probe& best,
                   const Probe& stable, const Probe& unstable, const ScanOptions& options) {
  HopfPoint h;
  h.lambda_star = params.with(p, best.value);
  h.x_star = best.x;
  h.line = line;
  h.parameter = p;
  h.direction = dir;
  h.tau = best.tau;
  h.bracket_stable = stable.value;
  h.bracket_unstable = unstable.value;

  const auto& spec = best.spectrum;
  if (!spec.leading_pair_index) throw Error(ErrorKind::EigenFailure, "no complex pair at located point");
  const std::complex<double> mu = spec.eigenvalues[*spec.leading_pair_index];
  h.omega_star = mu.imag();

  double others = -std::numeric_limits<double>::infinity();
  int near_axis_pairs = 0;
  for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
    const auto& e = spec.eigenvalues[i];
    const bool in_pair = std::abs(e - mu) <= 1e-10 * (1.0 + std::abs(mu)) ||
                         std::abs(e - std::conj(mu)) <= 1e-10 * (1.0 + std::abs(mu));
    if (in_pair) continue;
    others = std::max(others, e.real());
    if (e.real() > -options.separation && is_complex(e) && e.imag() > 0.0) ++near_axis_pairs;
  }
  h.noncritical_max_real = others;
  if (others > -options.separation) {
    throw Error(ErrorKind::EigenvalueCollision,
                "another eigenvalue has Re = " + std::to_string(others) + " at " + describe(p, best.value) +
                    (near_axis_pairs > 0 ? " (second complex pair)" : ""));
  }

  const Eigen::MatrixXd f_x = jacobian(best.x, h.lambda_star, line);
  critical_eigenvectors(f_x, mu, h.v, h.w);
  const std::complex<double> jw(0.0, h.omega_star);
  h.right_residual = (f_x.cast<std::complex<double>>() * h.v - jw * h.v).norm();
  h.left_residual = (h.w.adjoint() * f_x.cast<std::complex<double>>() - jw * h.w.adjoint()).norm();

  // Transversality from a central difference of tau along the scanned parameter.
  const double hstep = 1e-6 * std::max(std::abs(best.value), 1e-3);
  const Probe plus = probe(params, line, p, best.value + hstep, best.x);
  const Probe minus = probe(params, line, p, best.value - hstep, best.x);
  h.dtau_dlambda = (plus.tau - minus.tau) / (2.0 * hstep);
  if (!(std::abs(h.dtau_dlambda) >= options.transversality_min)) {
    throw Error(ErrorKind::NonTransversal,
                "d tau / d lambda = " + std::to_string(h.dtau_dlambda) + " at " + describe(p, best.value));
  }
  return h;
}

// Bisection on tau down to the tolerance, then Illinois false position to polish.
HopfPoint locate(const ParameterSet& params, LineModel line, Param p, Direction dir, Probe stable, Probe unstable,
                 const ScanOptions& options) {
  Probe best = std::abs(stable.tau) < std::abs(unstable.tau) ? stable : unstable;
  auto converged = [&](double tol) { return std::abs(best.tau) <= tol; };
  auto width_exhausted = [&] {
    return std::abs(unstable.value - stable.value) <=
           8.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(stable.value), 1e-300);
  };

  while (!converged(options.tau_tolerance) && !width_exhausted()) {
    const double mid = 0.5 * (stable.value + unstable.value);
    Probe m = probe(params, line, p, mid, stable.x);
    if (m.tau < 0.0) stable = m; else unstable = m;
    if (std::abs(m.tau) < std::abs(best.tau)) best = m;
  }

  int side = 0;
  for (int iter = 0; iter < 60 && !converged(options.polish_tolerance) && !width_exhausted(); ++iter) {
    double fa = stable.tau;
    double fb = unstable.tau;
    if (side == -1) fb *= 0.5;
    if (side == 1) fa *= 0.5;
    double next = (stable.value * fb - unstable.value * fa) / (fb - fa);
    const double lo = std::min(stable.value, unstable.value);
    const double hi = std::max(stable.value, unstable.value);
    if (!(next > lo && next < hi)) next = 0.5 * (stable.value + unstable.value);
    Probe m = probe(params, line, p, next, stable.x);
    if (m.tau < 0.0) {
      stable = m;
      side = -1;
    } else {
      unstable = m;
      side = 1;
    }
    if (std::abs(m.tau) < std::abs(best.tau)) best = m;
  }
  return finalize(params, line, p, dir, best, stable, unstable, options);
}

HopfPoint march(const ParameterSet& params, LineModel line, Param p, Direction dir, Probe start,
                const ScanOptions& options) {
  const double s = sign(dir);
  Probe current = std::move(start);
  const double upper = options.upper > 0.0 ? options.upper : std::max(20.0 * std::abs(current.value), kMinScanUpper);
  for (int k = 0; k < options.max_steps; ++k) {
    double step = std::max(options.step_fraction * std::abs(current.value), options.step_floor);
    if (dir == Direction::Up && current.value >= upper) break;

    std::optional<Probe> next;
    while (!next) {
      double target = current.value + s * step;
      if (dir == Direction::Up) target = std::min(target, upper);
      if (dir == Direction::Down && target <= options.lower) {
        throw Error(ErrorKind::NoBifurcation, std::string(name(p)) + " reached the lower bracket end without a crossing");
      }
      try {
        next = probe(params, line, p, target, current.x);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoConvergence && e.kind() != ErrorKind::SingularJacobian) throw;
        step *= 0.5;
        if (step < options.step_floor * 1e-6) {
          throw Error(ErrorKind::NoBifurcation, "equilibrium branch lost near " + describe(p, current.value));
        }
      }
    }
    if (next->tau > 0.0) return locate(params, line, p, dir, current, *next, options);
    reject_real_crossing(*next, p);
    current = std::move(*next);
  }
  throw Error(ErrorKind::NoBifurcation, std::string(name(p)) + " bracket exhausted without a crossing");
}

}  // namespace

double Spectrum::tau() const {
  if (!leading_pair_index) return -std::numeric_limits<double>::infinity();
  return eigenvalues[*leading_pair_index].real();
}

Spectrum spectrum_of(const Eigen::MatrixXd& jacobian, double hopf_tolerance) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(jacobian, false);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::EigenFailure, "eigenvalue iteration failed");
  Spectrum spec;
  const auto& ev = solver.eigenvalues();
  spec.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  for (const auto& mu : spec.eigenvalues) {
    if (!std::isfinite(mu.real()) || !std::isfinite(mu.imag())) {
      throw Error(ErrorKind::EigenFailure, "non-finite eigenvalue");
    }
  }
  std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  spec.max_real_part = spec.eigenvalues.front().real();

  int near_axis = 0;
  std::optional<std::size_t> near_index;
  for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
    const auto& mu = spec.eigenvalues[i];
    if (!is_complex(mu) || mu.imag() < 0.0) continue;
    if (!spec.leading_pair_index) spec.leading_pair_index = i;
    if (std::abs(mu.real()) < hopf_tolerance) {
      ++near_axis;
      near_index = i;
    }
  }
  if (near_axis == 1) spec.critical_pair_index = near_index;

  if (spec.max_real_part > hopf_tolerance) {
    spec.stability = Stability::Unstable;
  } else if (spec.critical_pair_index) {
    spec.stability = Stability::Critical;
  } else {
    spec.stability = spec.max_real_part < 0.0 ? Stability::Stable : Stability::Critical;
  }
  return spec;
}

Spectrum eigen_analysis(const StateVector& state, const ParameterSet& params, LineModel line, double hopf_tolerance) {
  return spectrum_of(jacobian(state, params, line), hopf_tolerance);
}

std::string_view to_string(Direction d) { return d == Direction::Up ? "up" : "down"; }

Direction direction_from_string(std::string_view text) {
  if (text == "up") return Direction::Up;
  if (text == "down") return Direction::Down;
  throw Error(ErrorKind::ConfigError, "direction must be 'up' or 'down', got '" + std::string(text) + "'");
}

std::optional<Direction> destabilizing_direction(Param p) {
  switch (p) {
    case Param::K_P:
    case Param::K_Q:
    case Param::K_VC_I:
    case Param::K_VC_F:
    case Param::K_CC_F:
    case Param::R_f:
    case Param::L_f:
    case Param::C_f:
      return Direction::Up;
    case Param::omega_pc:
    case Param::K_VC_P:
    case Param::K_CC_P:
    case Param::X:
      return Direction::Down;
    default:
      return std::nullopt;
  }
}

bool excluded_from_scan(Param p) { return p == Param::omega0 || p == Param::V0; }

ScanOptions default_scan_options(Param p, const ParameterSet& nominal) {
  ScanOptions o;
  const double v = std::abs(nominal[p]);
  // Small nominal values (droop gains, filter resistance) still get a bracket
  // reaching a few per-unit.
  o.upper = std::max(20.0 * v, kMinScanUpper);
  return o;
}

void critical_eigenvectors(const Eigen::MatrixXd& f_x, std::complex<double> mu, Eigen::VectorXcd& v,
                           Eigen::VectorXcd& w) {
  using Mat = Eigen::MatrixXcd;
  const auto n = f_x.rows();
  const Mat A = f_x.cast<std::complex<double>>();
  const Mat I = Mat::Identity(n, n);

  auto inverse_iteration = [&](const Mat& M) {
    const Eigen::PartialPivLU<Mat> lu(M - mu * I);
    Eigen::VectorXcd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = std::complex<double>(1.0, 0.1 * static_cast<double>(i));
    x.normalize();
    for (int k = 0; k < 4; ++k) {
      x = lu.solve(x);
      if (!x.allFinite()) throw Error(ErrorKind::EigenFailure, "inverse iteration diverged");
      x.normalize();
    }
    return x;
  };

  v = inverse_iteration(A);
  Eigen::Index big = 0;
  v.cwiseAbs().maxCoeff(&big);
  v *= std::abs(v[big]) / v[big];
  v.normalize();

  // y = conj(w) solves A^T y = mu y.
  w = inverse_iteration(A.transpose()).conjugate();
  const std::complex<double> wv = w.adjoint() * v;
  if (std::abs(wv) < 1e-14) throw Error(ErrorKind::EigenFailure, "left and right eigenvectors are orthogonal");
  w /= std::conj(wv);
}

HopfPoint scan_to_hopf(const ParameterSet& params, LineModel line, Param parameter, Direction direction,
                       const ScanOptions& options) {
  const Probe start = probe(params, line, parameter, params[parameter], flat_start(params, line));
  if (start.spectrum.max_real_part >= 0.0) {
    throw Error(ErrorKind::UnstableStart, "starting equilibrium is not stable (max Re = " +
                                              std::to_string(start.spectrum.max_real_part) + ")");
  }
  return march(params, line, parameter, direction, start, options);
}

HopfPoint scan_to_hopf(const ParameterSet& params, LineModel line, Param parameter, Direction direction) {
  return scan_to_hopf(params, line, parameter, direction, default_scan_options(parameter, params));
}

HopfPoint locate_hopf_near(const ParameterSet& params, LineModel line, Param parameter, Direction direction,
                           double hint, const StateVector& guess, const ScanOptions& options) {
  const double s = sign(direction);
  double back = 0.01 * std::max(std::abs(hint), options.step_floor);
  std::optional<Probe> start;
  for (int attempt = 0; attempt < 8 && !start; ++attempt, back *= 2.0) {
    Probe pr = probe(params, line, parameter, hint - s * back, guess);
    if (pr.tau < 0.0 && pr.spectrum.max_real_part < 0.0) start = std::move(pr);
  }
  if (!start) throw Error(ErrorKind::UnstableStart, "no stable point found below the Hopf hint");
  ScanOptions fine = options;
  fine.step_fraction = std::min(options.step_fraction, 0.002);
  return march(params, line, parameter, direction, *start, fine);
}

double margin(const HopfPoint& hopf, const ParameterSet& nominal) {
  return std::abs(hopf.lambda_star[hopf.parameter] - nominal[hopf.parameter]);
}

double margin(const ParameterSet& nominal, LineModel line, Param parameter, Direction direction) {
  return margin(scan_to_hopf(nominal, line, parameter, direction), nominal);
}

}  // namespace hopfmargin
