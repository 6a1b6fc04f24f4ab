#include "hopfmargin/tasks.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include <json.hpp>

#include "hopfmargin/equilibrium.hpp"
#include "hopfmargin/normal_vector.hpp"
#include "hopfmargin/parallel.hpp"
#include "hopfmargin/report.hpp"

namespace hopfmargin {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

unsigned thread_count_from_env() {
  if (const char* env = std::getenv("HOPFMARGIN_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidParameter:
    case ErrorKind::MismatchedReports: return kExitConfig;
    case ErrorKind::NoBifurcation: return kExitNoBifurcation;
    case ErrorKind::IoError: return kExitIo;
    default: return kExitNumerical;
  }
}

namespace {

ordered_json num(double v) { return ordered_json::parse(format_number(v)); }

ordered_json param_object(const ParameterSet& ps) {
  ordered_json o;
  for (const auto& e : param_table()) o[std::string(e.name)] = num(ps[e.id]);
  return o;
}

ordered_json vector_by_param(const Eigen::VectorXd& v) {
  ordered_json o;
  for (const auto& e : param_table()) o[std::string(e.name)] = num(v[static_cast<Eigen::Index>(index(e.id))]);
  return o;
}

ordered_json state_object(const StateVector& x, LineModel line) {
  ordered_json o;
  for (std::size_t i = 0; i < state_dimension(line); ++i) {
    o[std::string(name(static_cast<State>(i)))] = num(x[static_cast<Eigen::Index>(i)]);
  }
  return o;
}

ordered_json eigen_list(const Spectrum& s) {
  ordered_json a = ordered_json::array();
  for (const auto& mu : s.eigenvalues) a.push_back(ordered_json::array({num(mu.real()), num(mu.imag())}));
  return a;
}

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Critical: return "critical";
  }
  return "";
}

ordered_json hopf_json(const HopfPoint& h, const ParameterSet& nominal) {
  ordered_json o;
  o["parameter"] = std::string(name(h.parameter));
  o["direction"] = std::string(to_string(h.direction));
  o["line"] = std::string(to_string(h.line));
  o["lambda_star"] = num(h.lambda_star[h.parameter]);
  o["lambda_star_display"] = num(to_display(h.parameter, h.lambda_star[h.parameter]));
  o["unit"] = std::string(unit_label(h.parameter));
  o["omega_star"] = num(h.omega_star);
  o["margin"] = num(margin(h, nominal));
  o["dtau_dlambda"] = num(h.dtau_dlambda);
  o["right_residual"] = num(h.right_residual);
  o["left_residual"] = num(h.left_residual);
  o["noncritical_max_real"] = num(h.noncritical_max_real);
  o["x_star"] = state_object(h.x_star, h.line);
  return o;
}

HopfPoint find_hopf(const ParameterSet& params, LineModel line, Param p, std::optional<Direction> dir) {
  if (!dir) dir = destabilizing_direction(p);
  if (dir) return scan_to_hopf(params, line, p, *dir);
  try {
    return scan_to_hopf(params, line, p, Direction::Up);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoBifurcation) throw;
  }
  return scan_to_hopf(params, line, p, Direction::Down);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

void emit(const fs::path& out_dir, const std::string& file, const ordered_json& doc, std::ostream& summary) {
  const std::string text = doc.dump(2) + "\n";
  write_text(out_dir / file, text);
  summary << text;
}

unsigned resolve_threads(const Scenario& s) { return s.threads > 0 ? s.threads : thread_count_from_env(); }

void run_equilibrium(const Scenario& s, const fs::path& out_dir, std::ostream& summary) {
  ordered_json doc;
  doc["line"] = std::string(to_string(s.line));
  if (s.target) {
    const Branch b = continue_equilibrium(s.params, s.line, *s.param, *s.target);
    auto out = open_output(out_dir / "branch.csv");
    write_branch_csv(out, b, s.line);
    doc["branch_points"] = b.points.size();
    const ParameterSet end = s.params.with(*s.param, b.values.back());
    const Spectrum sp = eigen_analysis(b.points.back().state, end, s.line);
    doc["parameter"] = std::string(name(*s.param));
    doc["final_value"] = num(b.values.back());
    doc["state"] = state_object(b.points.back().state, s.line);
    doc["stability"] = std::string(to_string(sp.stability));
    doc["eigenvalues"] = eigen_list(sp);
  } else {
    const EquilibriumResult r = solve_equilibrium(s.params, s.line);
    const Spectrum sp = eigen_analysis(r.state, s.params, s.line);
    const Outputs o = outputs(r.state, s.params, s.line);
    doc["state"] = state_object(r.state, s.line);
    doc["residual_norm"] = num(r.residual_norm);
    doc["iterations"] = r.iterations;
    doc["p"] = num(o.p);
    doc["q"] = num(o.q);
    doc["vc_magnitude"] = num(o.vc_magnitude);
    doc["stability"] = std::string(to_string(sp.stability));
    doc["eigenvalues"] = eigen_list(sp);
  }
  emit(out_dir, "equilibrium.json", doc, summary);
}

void run_scan(const Scenario& s, const fs::path& out_dir, std::ostream& summary, const char* file) {
  const HopfPoint h = find_hopf(s.params, s.line, *s.param, s.direction);
  emit(out_dir, file, hopf_json(h, s.params), summary);
}

void run_nvec(const Scenario& s, const fs::path& out_dir, std::ostream& summary) {
  const HopfPoint h = find_hopf(s.params, s.line, *s.param, s.direction);
  const Eigen::VectorXd raw = raw_normal(h);
  const Eigen::VectorXd n = normalize_normal(raw, raw);
  ordered_json doc = hopf_json(h, s.params);
  doc["normal"] = vector_by_param(n);
  doc["raw_normal"] = vector_by_param(raw);
  ordered_json sens;
  for (const auto& e : param_table()) sens[std::string(e.name)] = num(bifurcation_sensitivity(n, h.parameter, e.id));
  doc["bifurcation_sensitivity"] = sens;
  emit(out_dir, "nvec.json", doc, summary);
}

ordered_json prediction_json(const MarginPrediction& m) {
  ordered_json o;
  o["cause"] = std::string(name(m.cause));
  o["direction"] = std::string(to_string(m.direction));
  o["control"] = std::string(name(m.control));
  o["old_control"] = num(m.old_control);
  o["new_control"] = num(m.new_control);
  o["old_margin"] = num(m.old_margin);
  o["bifurcation_sensitivity"] = num(m.bifurcation_sensitivity);
  o["margin_sensitivity"] = num(m.margin_sensitivity);
  o["estimated_margin"] = num(m.estimated_margin);
  o["true_margin"] = num(m.true_margin);
  o["error"] = num(m.estimated_margin - m.true_margin);
  o["new_hopf_value"] = num(m.new_hopf_value);
  return o;
}

void run_sens(const Scenario& s, const fs::path& out_dir, std::ostream& summary) {
  const Param cause = *s.param;
  std::optional<Direction> dir = s.direction ? s.direction : destabilizing_direction(cause);
  if (!dir) dir = find_hopf(s.params, s.line, cause, std::nullopt).direction;
  ordered_json doc;
  if (s.new_value) {
    doc = prediction_json(predict_margin(s.params, s.line, cause, *dir, *s.control, *s.new_value));
  } else {
    const HopfPoint h = scan_to_hopf(s.params, s.line, cause, *dir);
    const Eigen::VectorXd n = normal_vector(h);
    doc["cause"] = std::string(name(cause));
    doc["direction"] = std::string(to_string(*dir));
    doc["control"] = std::string(name(*s.control));
    doc["old_margin"] = num(margin(h, s.params));
    doc["bifurcation_sensitivity"] = num(bifurcation_sensitivity(n, cause, *s.control));
    doc["margin_sensitivity"] = num(margin_sensitivity(n, cause, *dir, *s.control));
  }
  emit(out_dir, "sens.json", doc, summary);
}

void run_heatmap(const Scenario& s, const fs::path& out_dir, std::ostream& summary) {
  const SensitivityReport r = full_sensitivity_matrix(s.params, s.line, resolve_threads(s));
  const std::string stem = "heatmap_" + std::string(to_string(s.line));
  {
    auto out = open_output(out_dir / (stem + ".csv"));
    write_heatmap_csv(out, r);
  }
  const std::string json = heatmap_json(r);
  write_text(out_dir / (stem + ".json"), json);
  summary << json;
}

void run_table1(const Scenario& s, const fs::path& out_dir, std::ostream& summary) {
  const unsigned threads = resolve_threads(s);
  const MarginReport st = compute_margins(s.params, LineModel::Static, threads);
  const MarginReport dy = compute_margins(s.params, LineModel::Dynamic, threads);
  std::ostringstream table;
  write_table1_csv(table, s.params, st, dy);
  write_text(out_dir / "table1.csv", table.str());
  // Compare the values as written so compare-lines on table1.csv reproduces this file.
  std::istringstream written(table.str());
  const auto [st_written, dy_written] = read_table1_csv(written);
  std::ostringstream cmp;
  write_comparison_csv(cmp, compare_lines(st_written, dy_written));
  write_text(out_dir / "comparison.csv", cmp.str());
  summary << table.str();
}

void run_table4(const Scenario& s, const fs::path& out_dir, std::ostream& summary) {
  const unsigned threads = resolve_threads(s);
  const SensitivityReport st = full_sensitivity_matrix(s.params, LineModel::Static, threads);
  const SensitivityReport dy = full_sensitivity_matrix(s.params, LineModel::Dynamic, threads);
  std::ostringstream table;
  write_table4_csv(table, st, dy);
  write_text(out_dir / "table4.csv", table.str());
  summary << table.str();
}

void run_compare(const Scenario& s, const fs::path& out_dir, std::ostream& summary) {
  std::ifstream in(*s.input);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + *s.input);
  const auto [st, dy] = read_table1_csv(in);
  std::ostringstream cmp;
  write_comparison_csv(cmp, compare_lines(st, dy));
  write_text(out_dir / "comparison.csv", cmp.str());
  summary << cmp.str();
}

void run_simulate(const Scenario& s, const fs::path& out_dir, std::ostream& summary) {
  const SimulationRun r = simulate_scenario(s);
  {
    auto out = open_output(out_dir / "trajectory.csv");
    write_trajectory_csv(out, r.trajectory, s.line);
  }
  ordered_json doc;
  doc["line"] = std::string(to_string(s.line));
  doc["classification"] = std::string(to_string(r.classification.kind));
  doc["amplitude"] = num(r.classification.amplitude);
  doc["frequency"] = r.classification.frequency ? num(*r.classification.frequency) : ordered_json(nullptr);
  if (r.hopf) {
    doc["hopf_parameter"] = std::string(name(r.hopf->parameter));
    doc["hopf_value"] = num(r.hopf->lambda_star[r.hopf->parameter]);
    doc["omega_star"] = num(r.hopf->omega_star);
  }
  doc["params"] = param_object(r.params);
  emit(out_dir, "simulate.json", doc, summary);
}

}  // namespace

MarginPrediction predict_margin(const ParameterSet& nominal, LineModel line, Param cause, Direction direction,
                                Param control, double new_value) {
  const HopfPoint h = scan_to_hopf(nominal, line, cause, direction);
  const Eigen::VectorXd n = normal_vector(h);
  MarginPrediction m{cause, direction, control};
  m.old_control = nominal[control];
  m.new_control = new_value;
  m.old_margin = margin(h, nominal);
  m.bifurcation_sensitivity = bifurcation_sensitivity(n, cause, control);
  m.margin_sensitivity = margin_sensitivity(n, cause, direction, control);
  m.estimated_margin = estimate_margin(m.old_margin, m.margin_sensitivity, new_value - m.old_control);

  // True margin: an independent scan of the retuned system from the nominal point.
  const HopfPoint moved = scan_to_hopf(nominal.with(control, new_value), line, cause, direction);
  m.new_hopf_value = moved.lambda_star[cause];
  m.true_margin = margin(moved, nominal);
  return m;
}

SimulationRun simulate_scenario(const Scenario& s) {
  SimulationRun r;
  r.params = s.params;
  StateVector guess;
  if (s.at_hopf) {
    r.hopf = find_hopf(s.params, s.line, *s.param, s.direction);
    r.params = r.hopf->lambda_star;
    guess = r.hopf->x_star;
  } else {
    guess = flat_start(r.params, s.line);
  }
  if (s.control && s.new_value) r.params.set(*s.control, *s.new_value);
  r.params.validate();

  r.x0 = solve_equilibrium(r.params, s.line, guess).state;
  r.x0[static_cast<Eigen::Index>(index(State::theta))] += s.perturbation;

  IntegratorOptions opts;
  opts.rtol = s.rtol;
  opts.atol = s.rtol * 1e-2;
  r.trajectory = integrate(r.x0, r.params, s.line, {0.0, s.t_end}, s.dt, opts);
  r.classification = classify(r.trajectory, s.window);
  return r;
}

void run(const Scenario& s, const fs::path& out_dir, std::ostream& summary) {
  validate_scenario(s);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  switch (s.task) {
    case Task::Equilibrium: run_equilibrium(s, out_dir, summary); break;
    case Task::Scan: run_scan(s, out_dir, summary, "scan.json"); break;
    case Task::Margin: run_scan(s, out_dir, summary, "margin.json"); break;
    case Task::NormalVector: run_nvec(s, out_dir, summary); break;
    case Task::Sensitivity: run_sens(s, out_dir, summary); break;
    case Task::Heatmap: run_heatmap(s, out_dir, summary); break;
    case Task::Simulate: run_simulate(s, out_dir, summary); break;
    case Task::TableI: run_table1(s, out_dir, summary); break;
    case Task::TableIV: run_table4(s, out_dir, summary); break;
    case Task::CompareLines: run_compare(s, out_dir, summary); break;
  }
}

}  // namespace hopfmargin
