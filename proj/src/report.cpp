#include "hopfmargin/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "hopfmargin/error.hpp"
#include "hopfmargin/parallel.hpp"

namespace hopfmargin {

namespace {

constexpr std::string_view kNull = "null";
constexpr std::string_view kExcluded = "-";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& text, int lineno) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') {
    throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": bad number '" + text + "'");
  }
  return v;
}

std::string display_field(const MarginEntry& e, Param p, bool hopf) {
  switch (e.status) {
    case MarginEntry::Status::Found: return format_number(to_display(p, hopf ? e.hopf_value : e.margin));
    case MarginEntry::Status::NoBifurcation: return std::string(kNull);
    case MarginEntry::Status::Excluded: return std::string(kExcluded);
  }
  return std::string(kNull);
}

MarginEntry parse_entry(const std::string& hopf, const std::string& margin, Param p, int lineno) {
  MarginEntry e;
  if (hopf == kNull) {
    e.status = MarginEntry::Status::NoBifurcation;
  } else if (hopf == kExcluded) {
    e.status = MarginEntry::Status::Excluded;
  } else {
    e.status = MarginEntry::Status::Found;
    e.hopf_value = from_display(p, parse_number(hopf, lineno));
    e.margin = from_display(p, parse_number(margin, lineno));
  }
  return e;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value == 0.0 ? 0.0 : value);
  return buf;
}

const MarginEntry* MarginReport::find(Param p) const {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i] == p) return &entries[i];
  }
  return nullptr;
}

const std::vector<Param>& table1_parameters() {
  static const std::vector<Param> rows{
      Param::R_f,    Param::L_f,    Param::C_f,    Param::omega_pc, Param::omega_qc, Param::K_P,
      Param::K_Q,    Param::K_VC_P, Param::K_VC_I, Param::K_VC_F,   Param::K_CC_P,   Param::K_CC_I,
      Param::K_CC_F, Param::omega0, Param::V0,     Param::p_star,   Param::q_star,   Param::X,
      Param::R,
  };
  return rows;
}

MarginReport compute_margins(const ParameterSet& nominal, LineModel line, unsigned threads) {
  MarginReport report;
  report.line = line;
  report.params = table1_parameters();
  report.entries.resize(report.params.size());

  parallel_for(report.params.size(), threads, [&](std::size_t i) {
    const Param p = report.params[i];
    MarginEntry& e = report.entries[i];
    if (excluded_from_scan(p)) {
      e.status = MarginEntry::Status::Excluded;
      return;
    }
    std::vector<Direction> tries;
    if (auto d = destabilizing_direction(p)) tries = {*d};
    else tries = {Direction::Up, Direction::Down};
    for (Direction d : tries) {
      try {
        const HopfPoint h = scan_to_hopf(nominal, line, p, d);
        e.status = MarginEntry::Status::Found;
        e.hopf_value = h.lambda_star[p];
        e.margin = margin(h, nominal);
        e.direction = d;
        e.omega_star = h.omega_star;
        e.note.clear();
        return;
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::NoBifurcation) throw;
        e.status = MarginEntry::Status::NoBifurcation;
        e.note += (e.note.empty() ? "" : "; ") + std::string(to_string(d)) + ": " + err.what();
      }
    }
  });
  return report;
}

void write_table1_csv(std::ostream& out, const ParameterSet& nominal, const MarginReport& s, const MarginReport& d) {
  if (s.params != d.params) throw Error(ErrorKind::MismatchedReports, "reports cover different parameters");
  out << "parameter,nominal,hopf_static,hopf_dynamic,margin_static,margin_dynamic\n";
  for (std::size_t i = 0; i < s.params.size(); ++i) {
    const Param p = s.params[i];
    out << name(p) << ',' << format_number(to_display(p, nominal[p])) << ',' << display_field(s.entries[i], p, true)
        << ',' << display_field(d.entries[i], p, true) << ',' << display_field(s.entries[i], p, false) << ','
        << display_field(d.entries[i], p, false) << '\n';
  }
}

std::pair<MarginReport, MarginReport> read_table1_csv(std::istream& in) {
  MarginReport s;
  MarginReport d;
  s.line = LineModel::Static;
  d.line = LineModel::Dynamic;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line.rfind("parameter,", 0) != 0) throw Error(ErrorKind::ConfigError, "line 1: missing table header");
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 6) throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": expected 6 fields");
    const auto p = param_from_name(f[0]);
    if (!p) throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": unknown parameter " + f[0]);
    s.params.push_back(*p);
    d.params.push_back(*p);
    s.entries.push_back(parse_entry(f[2], f[4], *p, lineno));
    d.entries.push_back(parse_entry(f[3], f[5], *p, lineno));
  }
  return {std::move(s), std::move(d)};
}

LineComparison compare_lines(const MarginReport& s, const MarginReport& d) {
  if (s.params != d.params) throw Error(ErrorKind::MismatchedReports, "reports cover different parameters");
  if (s.line != LineModel::Static || d.line != LineModel::Dynamic) {
    throw Error(ErrorKind::MismatchedReports, "expected a static-line and a dynamic-line report");
  }
  LineComparison cmp;
  double best_abs = -1.0;
  double best_rel = -1.0;
  for (std::size_t i = 0; i < s.params.size(); ++i) {
    LineComparison::Row row;
    row.param = s.params[i];
    const auto& es = s.entries[i];
    const auto& ed = d.entries[i];
    if (es.status == MarginEntry::Status::Found) row.margin_static = es.margin;
    if (ed.status == MarginEntry::Status::Found) row.margin_dynamic = ed.margin;
    if (row.margin_static && row.margin_dynamic) {
      row.delta = *row.margin_static - *row.margin_dynamic;
      row.relative = *row.margin_static != 0.0 ? *row.delta / *row.margin_static : 0.0;
      if (*row.delta < 0.0) cmp.uniform_reduction = false;
      if (*row.delta > best_abs) {
        best_abs = *row.delta;
        cmp.largest_absolute = row.param;
      }
      if (*row.relative > best_rel) {
        best_rel = *row.relative;
        cmp.largest_relative = row.param;
      }
    }
    cmp.rows.push_back(row);
  }
  return cmp;
}

void write_comparison_csv(std::ostream& out, const LineComparison& cmp) {
  auto field = [](const std::optional<double>& v, Param p, bool convert) {
    if (!v) return std::string(kNull);
    return format_number(convert ? to_display(p, *v) : *v);
  };
  out << "parameter,margin_static,margin_dynamic,delta,relative_delta\n";
  for (const auto& r : cmp.rows) {
    out << name(r.param) << ',' << field(r.margin_static, r.param, true) << ',' << field(r.margin_dynamic, r.param, true)
        << ',' << field(r.delta, r.param, true) << ',' << field(r.relative, r.param, false) << '\n';
  }
  out << "# uniform_reduction=" << (cmp.uniform_reduction ? "true" : "false")
      << " largest_absolute=" << (cmp.largest_absolute ? name(*cmp.largest_absolute) : kNull)
      << " largest_relative=" << (cmp.largest_relative ? name(*cmp.largest_relative) : kNull) << '\n';
}

void write_heatmap_csv(std::ostream& out, const SensitivityReport& report) {
  out << "cause,direction";
  for (const auto& entry : param_table()) out << ',' << entry.name;
  out << '\n';
  for (const auto& row : report.rows) {
    out << name(row.cause) << ',' << (row.direction ? to_string(*row.direction) : kNull);
    for (std::size_t c = 0; c < kParamCount; ++c) {
      out << ',' << (row.normalized ? format_number((*row.normalized)[c]) : std::string(kNull));
    }
    out << '\n';
  }
}

std::string heatmap_json(const SensitivityReport& report) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["line"] = std::string(to_string(report.line));
  ordered_json cols = ordered_json::array();
  for (const auto& entry : param_table()) cols.push_back(std::string(entry.name));
  doc["columns"] = cols;
  ordered_json rows = ordered_json::array();
  // Numbers go through format_number so the sidecar is stable across platforms.
  auto num = [](double v) { return ordered_json::parse(format_number(v)); };
  for (const auto& row : report.rows) {
    ordered_json r;
    r["cause"] = std::string(name(row.cause));
    r["direction"] = row.direction ? ordered_json(std::string(to_string(*row.direction))) : ordered_json(nullptr);
    if (!row.sensitivities) {
      r["missing"] = true;
      r["reason"] = row.failure;
    } else {
      r["hopf_value"] = num(*row.hopf_value);
      ordered_json raw = ordered_json::array();
      ordered_json norm = ordered_json::array();
      for (std::size_t c = 0; c < kParamCount; ++c) {
        raw.push_back(num((*row.sensitivities)[c]));
        norm.push_back(num((*row.normalized)[c]));
      }
      r["raw"] = raw;
      r["normalized"] = norm;
      r["best_control"] = std::string(name(*row.best_control));
      r["best_value"] = num(*row.best_value);
    }
    rows.push_back(r);
  }
  doc["rows"] = rows;
  return doc.dump(2) + "\n";
}

void write_table4_csv(std::ostream& out, const SensitivityReport& s, const SensitivityReport& d) {
  if (s.rows.size() != d.rows.size()) throw Error(ErrorKind::MismatchedReports, "sensitivity reports differ in rows");
  out << "cause,direction,control_static,sensitivity_static,control_dynamic,sensitivity_dynamic\n";
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const auto& rs = s.rows[i];
    const auto& rd = d.rows[i];
    if (rs.cause != rd.cause) throw Error(ErrorKind::MismatchedReports, "sensitivity reports differ in row order");
    const auto dir = rs.direction ? rs.direction : rd.direction;
    out << name(rs.cause) << ',' << (dir ? to_string(*dir) : kNull) << ','
        << (rs.best_control ? name(*rs.best_control) : kNull) << ','
        << (rs.best_value ? format_number(*rs.best_value) : std::string(kNull)) << ','
        << (rd.best_control ? name(*rd.best_control) : kNull) << ','
        << (rd.best_value ? format_number(*rd.best_value) : std::string(kNull)) << '\n';
  }
}

}  // namespace hopfmargin
