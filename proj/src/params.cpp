#include "hopfmargin/params.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include "hopfmargin/error.hpp"

namespace hopfmargin {

namespace {

using enum DisplayUnit;

constexpr std::array<ParamInfo, kParamCount> kTable{{
    {Param::p_star, "p_star", PerUnit, true},
    {Param::q_star, "q_star", PerUnit, true},
    {Param::omega0, "omega0", PerUnit, true},
    {Param::V0, "V0", PerUnit, true},
    {Param::K_P, "K_P", Percent, true},
    {Param::K_Q, "K_Q", Percent, true},
    {Param::omega_pc, "omega_pc", RadPerSecond, false},
    {Param::omega_qc, "omega_qc", RadPerSecond, false},
    {Param::omega_b, "omega_b", RadPerSecond, false},
    {Param::K_VC_P, "K_VC_P", PerUnit, true},
    {Param::K_VC_I, "K_VC_I", PerUnit, true},
    {Param::K_CC_F, "K_CC_F", PerUnit, true},
    {Param::K_CC_P, "K_CC_P", PerUnit, true},
    {Param::K_CC_I, "K_CC_I", PerUnit, true},
    {Param::K_VC_F, "K_VC_F", PerUnit, true},
    {Param::R_f, "R_f", PerUnit, false},
    {Param::C_f, "C_f", PerUnit, false},
    {Param::L_f, "L_f", PerUnit, false},
    {Param::v_gD, "v_gD", PerUnit, false},
    {Param::v_gQ, "v_gQ", PerUnit, false},
    {Param::R, "R", PerUnit, false},
    {Param::X, "X", PerUnit, false},
}};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

const std::array<ParamInfo, kParamCount>& param_table() { return kTable; }

const ParamInfo& info(Param p) { return kTable[index(p)]; }

std::string_view name(Param p) { return kTable[index(p)].name; }

std::optional<Param> param_from_name(std::string_view n) {
  for (const auto& entry : kTable) {
    if (entry.name == n) return entry.id;
  }
  return std::nullopt;
}

double to_display(Param p, double value) {
  return info(p).unit == Percent ? value * 100.0 : value;
}

double from_display(Param p, double value) {
  return info(p).unit == Percent ? value / 100.0 : value;
}

std::string_view unit_label(Param p) {
  switch (info(p).unit) {
    case PerUnit: return "p.u.";
    case Percent: return "%";
    case RadPerSecond: return "rad/s";
  }
  return "";
}

ParameterSet ParameterSet::nominal() {
  ParameterSet ps;
  ps.set(Param::p_star, 1.0);
  ps.set(Param::q_star, 0.5);
  ps.set(Param::omega0, 1.0);
  ps.set(Param::V0, 1.0);
  ps.set(Param::K_P, 0.018);
  ps.set(Param::K_Q, 0.0001);
  ps.set(Param::omega_pc, 332.8);
  ps.set(Param::omega_qc, 732.8);
  ps.set(Param::omega_b, 2.0 * std::numbers::pi * 50.0);
  ps.set(Param::K_VC_P, 1.0);
  ps.set(Param::K_VC_I, 1.16);
  ps.set(Param::K_CC_F, 0.0);
  ps.set(Param::K_CC_P, 2.5);
  ps.set(Param::K_CC_I, 1.19);
  ps.set(Param::K_VC_F, 1.0);
  ps.set(Param::R_f, 0.0072);
  ps.set(Param::C_f, 0.3);
  ps.set(Param::L_f, 0.05);
  ps.set(Param::v_gD, 1.0);
  ps.set(Param::v_gQ, 0.0);
  ps.set(Param::R, 0.02);
  ps.set(Param::X, 0.2);
  return ps;
}

double ParameterSet::impedance_squared() const {
  return get(Param::R) * get(Param::R) + get(Param::X) * get(Param::X);
}

double ParameterSet::impedance() const { return std::sqrt(impedance_squared()); }

void ParameterSet::validate() const {
  for (const auto& entry : kTable) {
    if (!std::isfinite(get(entry.id))) {
      throw Error(ErrorKind::InvalidParameter, std::string(entry.name) + " is not finite");
    }
  }
  for (Param p : {Param::L_f, Param::C_f, Param::omega_b, Param::omega_pc, Param::omega_qc, Param::omega0}) {
    if (!(get(p) > 0.0)) {
      throw Error(ErrorKind::InvalidParameter, std::string(name(p)) + " must be positive");
    }
  }
  if (!(impedance_squared() > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "line impedance Z must be positive");
  }
}

ParameterSet parse_parameter_file(std::istream& in, const ParameterSet& base) {
  ParameterSet ps = base;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": expected 'name = value'");
    }
    const auto key = trim(view.substr(0, eq));
    const auto text = trim(view.substr(eq + 1));
    const auto id = param_from_name(key);
    if (!id) {
      throw Error(ErrorKind::ConfigError,
                  "line " + std::to_string(lineno) + ": unknown parameter '" + std::string(key) + "'");
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": bad number '" +
                                              std::string(text) + "' for " + std::string(key));
    }
    ps.set(*id, value);
  }
  return ps;
}

void write_parameter_file(std::ostream& out, const ParameterSet& params) {
  char buf[64];
  for (const auto& entry : kTable) {
    std::snprintf(buf, sizeof buf, "%.17g", params[entry.id]);
    out << entry.name << " = " << buf << '\n';
  }
}

}  // namespace hopfmargin
