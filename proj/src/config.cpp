#include "hopfmargin/config.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <utility>

#include "hopfmargin/error.hpp"

namespace hopfmargin {

namespace {

constexpr std::array<std::pair<Task, std::string_view>, 10> kTasks{{
    {Task::Equilibrium, "equilibrium"},
    {Task::Scan, "scan"},
    {Task::Margin, "margin"},
    {Task::NormalVector, "nvec"},
    {Task::Sensitivity, "sens"},
    {Task::Heatmap, "heatmap"},
    {Task::Simulate, "simulate"},
    {Task::TableI, "table1"},
    {Task::TableIV, "table4"},
    {Task::CompareLines, "compare-lines"},
}};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int lineno, std::string_view key, const std::string& message) {
  std::string where = "line " + std::to_string(lineno);
  if (!key.empty()) where += ", field '" + std::string(key) + "'";
  throw Error(ErrorKind::ConfigError, where + ": " + message);
}

double parse_double(int lineno, std::string_view key, std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) fail(lineno, key, "bad number '" + std::string(text) + "'");
  return value;
}

bool parse_bool(int lineno, std::string_view key, std::string_view text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  fail(lineno, key, "expected true or false, got '" + std::string(text) + "'");
}

Param parse_param(int lineno, std::string_view key, std::string_view text) {
  const auto p = param_from_name(text);
  if (!p) fail(lineno, key, "unknown parameter '" + std::string(text) + "'");
  return *p;
}

void apply_scenario_key(Scenario& s, int lineno, std::string_view key, std::string_view value) {
  try {
    if (key == "task") {
      const auto t = task_from_string(value);
      if (!t) fail(lineno, key, "unknown task '" + std::string(value) + "'");
      s.task = *t;
    } else if (key == "line") {
      s.line = line_from_string(value);
    } else if (key == "param") {
      s.param = parse_param(lineno, key, value);
    } else if (key == "direction") {
      s.direction = direction_from_string(value);
    } else if (key == "target") {
      s.target = parse_double(lineno, key, value);
    } else if (key == "control") {
      s.control = parse_param(lineno, key, value);
    } else if (key == "new_value") {
      s.new_value = parse_double(lineno, key, value);
    } else if (key == "at_hopf") {
      s.at_hopf = parse_bool(lineno, key, value);
    } else if (key == "perturbation") {
      s.perturbation = parse_double(lineno, key, value);
    } else if (key == "t_end") {
      s.t_end = parse_double(lineno, key, value);
    } else if (key == "dt") {
      s.dt = parse_double(lineno, key, value);
    } else if (key == "window") {
      s.window = parse_double(lineno, key, value);
    } else if (key == "rtol") {
      s.rtol = parse_double(lineno, key, value);
    } else if (key == "input") {
      s.input = std::string(value);
    } else if (key == "threads") {
      const double t = parse_double(lineno, key, value);
      if (t < 0 || t != static_cast<unsigned>(t)) fail(lineno, key, "expected a non-negative integer");
      s.threads = static_cast<unsigned>(t);
    } else {
      fail(lineno, key, "unknown scenario key");
    }
  } catch (const Error& e) {
    // Errors raised through fail() already carry the location.
    const std::string& d = e.detail();
    const bool located = d.rfind("line ", 0) == 0 && d.size() > 5 && std::isdigit(static_cast<unsigned char>(d[5]));
    if (e.kind() == ErrorKind::ConfigError && located) throw;
    fail(lineno, key, e.detail());
  }
}

}  // namespace

std::string_view to_string(Task task) {
  for (const auto& [t, n] : kTasks) {
    if (t == task) return n;
  }
  return "";
}

std::optional<Task> task_from_string(std::string_view text) {
  for (const auto& [t, n] : kTasks) {
    if (n == text) return t;
  }
  return std::nullopt;
}

Scenario parse_scenario(std::istream& in) {
  Scenario s;
  enum class Section { None, Scenario, Params } section = Section::None;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, {}, "unterminated section header");
      const auto header = trim(line.substr(1, line.size() - 2));
      if (header == "scenario") section = Section::Scenario;
      else if (header == "params") section = Section::Params;
      else fail(lineno, {}, "unknown section '" + std::string(header) + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(lineno, {}, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) fail(lineno, {}, "empty key");
    if (value.empty()) fail(lineno, key, "empty value");
    switch (section) {
      case Section::None: fail(lineno, key, "entry outside of a section");
      case Section::Scenario: apply_scenario_key(s, lineno, key, value); break;
      case Section::Params: s.params.set(parse_param(lineno, key, key), parse_double(lineno, key, value)); break;
    }
  }
  try {
    s.params.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, "[params]: " + e.detail());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  try {
    return parse_scenario(in);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ConfigError) throw;
    throw Error(ErrorKind::ConfigError, path + ": " + e.detail());
  }
}

void validate_scenario(const Scenario& s) {
  auto need = [&](bool ok, const char* field) {
    if (!ok) throw Error(ErrorKind::ConfigError, std::string("task ") + std::string(to_string(s.task)) + " requires '" + field + "'");
  };
  switch (s.task) {
    case Task::Scan:
    case Task::Margin:
    case Task::NormalVector: need(s.param.has_value(), "param"); break;
    case Task::Sensitivity:
      need(s.param.has_value(), "param");
      need(s.control.has_value(), "control");
      break;
    case Task::Simulate:
      need(!s.at_hopf || s.param.has_value(), "param");
      need(s.t_end > 0.0 && s.dt > 0.0 && s.window > 0.0 && s.rtol > 0.0, "positive t_end, dt, window and rtol");
      break;
    case Task::CompareLines: need(s.input.has_value(), "input"); break;
    case Task::Equilibrium:
      need(!s.target || s.param.has_value(), "param");
      break;
    case Task::Heatmap:
    case Task::TableI:
    case Task::TableIV: break;
  }
  if (s.param && excluded_from_scan(*s.param) && s.task != Task::Equilibrium) {
    throw Error(ErrorKind::ConfigError, std::string(name(*s.param)) + " is excluded from bifurcation analysis");
  }
}

}  // namespace hopfmargin
