#include "hopfmargin/normal_vector.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "hopfmargin/error.hpp"
#include "hopfmargin/parallel.hpp"

namespace hopfmargin {

Eigen::VectorXd raw_normal(const HopfPoint& hopf) {
  return raw_normal(hopf, linearize(hopf.x_star, hopf.lambda_star, hopf.line));
}

Eigen::VectorXd raw_normal(const HopfPoint& hopf, const LinearizationBundle& bundle) {
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(bundle.f_x);
  if (!(lu.rcond() > 1e-14)) {
    throw Error(ErrorKind::SingularAtBifurcation, "f_x is singular at the Hopf point");
  }
  // dx/dlambda = -f_x^{-1} f_lambda, one factorization for all columns.
  const Eigen::MatrixXd dx_dlambda = -lu.solve(bundle.f_lambda);
  if (!dx_dlambda.allFinite()) throw Error(ErrorKind::SingularAtBifurcation, "linear solve failed");

  const Eigen::Index m = bundle.f_lambda.cols();
  Eigen::VectorXd raw(m);
  const Eigen::RowVectorXcd wH = hopf.w.adjoint();
  for (Eigen::Index k = 0; k < m; ++k) {
    // Total derivative of f_x along the branch with respect to lambda_k.
    const Eigen::MatrixXd df_x = bundle.f_xx.contract_last(dx_dlambda.col(k)) +
                                 bundle.f_xlambda.slice_last(static_cast<std::size_t>(k));
    const std::complex<double> dmu = wH * (df_x.cast<std::complex<double>>() * hopf.v);
    raw[k] = dmu.real();
  }
  return raw;
}

Eigen::VectorXd normalize_normal(const Eigen::VectorXd& scaled_raw, const Eigen::VectorXd& orientation) {
  const double norm = scaled_raw.norm();
  if (!(norm >= 1e-12)) throw Error(ErrorKind::DegenerateNormal, "normal vector norm " + std::to_string(norm));
  Eigen::VectorXd n = scaled_raw / norm;
  if (n.dot(orientation) < 0.0) n = -n;
  return n;
}

Eigen::VectorXd normal_vector(const HopfPoint& hopf) {
  const Eigen::VectorXd raw = raw_normal(hopf);
  return normalize_normal(raw, raw);
}

double bifurcation_sensitivity(const Eigen::VectorXd& normal, Param cause, Param control) {
  const double n_cause = normal[static_cast<Eigen::Index>(index(cause))];
  if (std::abs(n_cause) < 1e-10) {
    throw Error(ErrorKind::TangentialDirection, std::string(name(cause)) + " is tangential to the Hopf surface");
  }
  if (cause == control) return -1.0;
  return -normal[static_cast<Eigen::Index>(index(control))] / n_cause;
}

Eigen::VectorXd margin_sensitivity(const Eigen::VectorXd& normal, const Eigen::VectorXd& k) {
  const double kn = k.dot(normal);
  if (std::abs(kn) < 1e-10) throw Error(ErrorKind::TangentialDirection, "direction is tangential to the Hopf surface");
  return -normal / kn;
}

double margin_sensitivity(const Eigen::VectorXd& normal, Param cause, Direction direction, Param control) {
  Eigen::VectorXd k = Eigen::VectorXd::Zero(normal.size());
  k[static_cast<Eigen::Index>(index(cause))] = sign(direction);
  return margin_sensitivity(normal, k)[static_cast<Eigen::Index>(index(control))];
}

double display_sensitivity(double sensitivity, Param cause, Param control) {
  return sensitivity * to_display(cause, 1.0) / to_display(control, 1.0);
}

double estimate_margin(double old_margin, double margin_sens, double delta_control) {
  return old_margin + margin_sens * delta_control;
}

const std::vector<Param>& instability_parameters() {
  static const std::vector<Param> rows{
      Param::K_P,    Param::K_Q,    Param::omega_pc, Param::K_VC_P, Param::K_VC_I,
      Param::K_VC_F, Param::K_CC_P, Param::K_CC_I,   Param::K_CC_F, Param::R_f,
      Param::L_f,    Param::C_f,    Param::X,        Param::R,
  };
  return rows;
}

std::optional<Param> best_control(const std::vector<double>& row, Param cause) {
  std::optional<Param> best;
  double best_abs = -1.0;
  for (const auto& entry : param_table()) {
    if (!entry.controllable || entry.id == cause) continue;
    const double a = std::abs(row[index(entry.id)]);
    if (a > best_abs) {
      best_abs = a;
      best = entry.id;
    }
  }
  return best;
}

SensitivityReport full_sensitivity_matrix(const ParameterSet& nominal, LineModel line, unsigned threads) {
  SensitivityReport report;
  report.line = line;
  const auto& causes = instability_parameters();
  report.rows.resize(causes.size());

  parallel_for(causes.size(), threads, [&](std::size_t r) {
    SensitivityRow& row = report.rows[r];
    row.cause = causes[r];
    row.direction = destabilizing_direction(row.cause);
    std::vector<Direction> tries;
    if (row.direction) tries = {*row.direction};
    else tries = {Direction::Up, Direction::Down};

    std::optional<HopfPoint> hopf;
    for (Direction d : tries) {
      try {
        hopf = scan_to_hopf(nominal, line, row.cause, d);
        row.direction = d;
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoBifurcation) throw;
        row.failure = e.what();
      }
    }
    if (!hopf) return;

    const Eigen::VectorXd normal = normal_vector(*hopf);
    std::vector<double> values(kParamCount);
    for (std::size_t c = 0; c < kParamCount; ++c) {
      values[c] = display_sensitivity(bifurcation_sensitivity(normal, row.cause, static_cast<Param>(c)), row.cause,
                                      static_cast<Param>(c));
    }
    double max_abs = 0.0;
    for (double v : values) max_abs = std::max(max_abs, std::abs(v));
    std::vector<double> normalized(kParamCount);
    for (std::size_t c = 0; c < kParamCount; ++c) normalized[c] = values[c] / max_abs;

    row.best_control = best_control(values, row.cause);
    if (row.best_control) row.best_value = values[index(*row.best_control)];
    row.hopf_value = hopf->lambda_star[row.cause];
    row.sensitivities = std::move(values);
    row.normalized = std::move(normalized);
    row.failure.clear();
  });
  return report;
}

}  // namespace hopfmargin
