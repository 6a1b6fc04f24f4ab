#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hopfmargin/equilibrium.hpp"
#include "hopfmargin/model.hpp"
#include "hopfmargin/params.hpp"

namespace hopfmargin {

enum class Stability { Stable, Unstable, Critical };

struct Spectrum {
  /// Sorted by descending real part, then descending imaginary part.
  std::vector<std::complex<double>> eigenvalues;
  double max_real_part = 0.0;
  /// Index of the eigenvalue with positive imaginary part of the complex pair
  /// with the largest real part; nullopt when the spectrum is purely real.
  std::optional<std::size_t> leading_pair_index;
  /// Set iff exactly one complex pair has |Re| below the Hopf tolerance.
  std::optional<std::size_t> critical_pair_index;
  Stability stability = Stability::Stable;

  /// Largest real part over complex pairs (the scan test function).
  double tau() const;
};

inline constexpr double kHopfTolerance = 1e-6;

Spectrum eigen_analysis(const StateVector& state, const ParameterSet& params, LineModel line,
                        double hopf_tolerance = kHopfTolerance);
Spectrum spectrum_of(const Eigen::MatrixXd& jacobian, double hopf_tolerance = kHopfTolerance);

enum class Direction { Up, Down };

inline double sign(Direction d) { return d == Direction::Up ? 1.0 : -1.0; }
std::string_view to_string(Direction d);
Direction direction_from_string(std::string_view text);

struct ScanOptions {
  /// Bracket for the scanned parameter; lower end exclusive. An upper bound of
  /// 0 selects the default_scan_options bracket.
  double lower = 0.0;
  double upper = 0.0;
  double step_fraction = 0.02;
  double step_floor = 1e-6;
  /// Bisection stops once |tau| falls below this.
  double tau_tolerance = 1e-8;
  /// Bracketed secant polish applied after bisection.
  double polish_tolerance = 1e-13;
  /// Non-critical eigenvalues must satisfy Re <= -separation.
  double separation = 1e-4;
  double transversality_min = 1e-6;
  int max_steps = 20000;
};

inline constexpr double kMinScanUpper = 5.0;

/// Bracket (0, max(20 |nominal|, kMinScanUpper)] for the given parameter.
ScanOptions default_scan_options(Param p, const ParameterSet& nominal);

/// Direction in which each parameter is known to destabilize the inverter;
/// nullopt for parameters without such a direction (both are scanned).
std::optional<Direction> destabilizing_direction(Param p);

/// Parameters excluded from bifurcation scans by engineering policy.
bool excluded_from_scan(Param p);

struct HopfPoint {
  ParameterSet lambda_star;
  StateVector x_star;
  double omega_star = 0.0;
  Eigen::VectorXcd v;  // right eigenvector, ||v|| = 1
  Eigen::VectorXcd w;  // left eigenvector, w^H v = 1
  LineModel line = LineModel::Static;
  Param parameter = Param::X;
  Direction direction = Direction::Down;
  double tau = 0.0;
  double dtau_dlambda = 0.0;
  double right_residual = 0.0;
  double left_residual = 0.0;
  /// Largest real part among the non-critical eigenvalues.
  double noncritical_max_real = 0.0;
  /// Final bracket [a, b] in the parameter with tau(a) < 0 < tau(b) ordering by scan direction.
  double bracket_stable = 0.0;
  double bracket_unstable = 0.0;
};

/// Right/left eigenvectors of the critical pair at an equilibrium where the
/// eigenvalue `mu` is (nearly) imaginary. v is phase-fixed so its largest
/// entry is real positive and normalized; w satisfies w^H v = 1.
void critical_eigenvectors(const Eigen::MatrixXd& f_x, std::complex<double> mu, Eigen::VectorXcd& v,
                           Eigen::VectorXcd& w);

/// Marches `parameter` from its value in `params` until the leading complex
/// pair crosses the imaginary axis, then locates the crossing. Throws
/// NoBifurcation, EigenvalueCollision, NonTransversal or UnstableStart.
HopfPoint scan_to_hopf(const ParameterSet& params, LineModel line, Param parameter, Direction direction,
                       const ScanOptions& options);
HopfPoint scan_to_hopf(const ParameterSet& params, LineModel line, Param parameter, Direction direction);

/// Re-locates the Hopf point in `parameter` starting from a nearby parameter
/// point, using a bracket around `hint`. Used for tangent oracles and true margins.
HopfPoint locate_hopf_near(const ParameterSet& params, LineModel line, Param parameter, Direction direction,
                           double hint, const StateVector& guess, const ScanOptions& options);

/// |lambda*_i - lambda0_i| for the scanned parameter.
double margin(const HopfPoint& hopf, const ParameterSet& nominal);

/// Scans and returns the single-parameter margin.
double margin(const ParameterSet& nominal, LineModel line, Param parameter, Direction direction);

}  // namespace hopfmargin
