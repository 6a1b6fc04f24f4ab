#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hopfmargin/config.hpp"
#include "hopfmargin/error.hpp"
#include "hopfmargin/tasks.hpp"

using namespace hopfmargin;

namespace {

struct CommonFlags {
  std::string config;
  std::string line;
  std::string param;
  std::string direction;
  std::string out = ".";
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config,--scenario", f.config, "Scenario file ([scenario] and [params] sections)");
  cmd->add_option("--line", f.line, "Line model: static or dynamic");
  cmd->add_option("--param", f.param, "Parameter name, e.g. X or K_VC_F");
  cmd->add_option("--direction", f.direction, "Scan direction: up or down");
  cmd->add_option("--out", f.out, "Output directory");
}

Scenario build(Task task, const CommonFlags& f) {
  Scenario s = f.config.empty() ? Scenario{} : load_scenario(f.config);
  s.task = task;
  if (!f.line.empty()) s.line = line_from_string(f.line);
  if (!f.param.empty()) {
    const auto p = param_from_name(f.param);
    if (!p) throw Error(ErrorKind::ConfigError, "--param: unknown parameter '" + f.param + "'");
    s.param = *p;
  }
  if (!f.direction.empty()) s.direction = direction_from_string(f.direction);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hopf bifurcation margins and sensitivities of a droop-controlled grid-forming inverter"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::optional<double> target;
  std::string control;
  std::optional<double> new_value;
  std::string input;

  struct Entry {
    const char* name;
    Task task;
    const char* help;
  };
  const Entry entries[] = {
      {"equilibrium", Task::Equilibrium, "Solve the equilibrium (optionally continue --param to --target)"},
      {"scan", Task::Scan, "Locate the Hopf point along one parameter"},
      {"margin", Task::Margin, "Single-parameter stability margin"},
      {"nvec", Task::NormalVector, "Normal vector of the Hopf surface at the located point"},
      {"sens", Task::Sensitivity, "Margin sensitivity to a control parameter"},
      {"heatmap", Task::Heatmap, "Row-normalized sensitivity matrix with JSON sidecar"},
      {"simulate", Task::Simulate, "Time-domain simulation and trajectory classification"},
      {"table1", Task::TableI, "Hopf values and margins for both line models"},
      {"table4", Task::TableIV, "Most influential control parameter per instability cause"},
      {"compare-lines", Task::CompareLines, "Static vs dynamic margin comparison from a table1 CSV"},
  };
  std::optional<Task> chosen;
  for (const auto& e : entries) {
    CLI::App* cmd = app.add_subcommand(e.name, e.help);
    add_common(cmd, flags);
    if (e.task == Task::Equilibrium) cmd->add_option("--target", target, "Continuation end value (p.u.)");
    if (e.task == Task::Sensitivity) {
      cmd->add_option("--control", control, "Control parameter name");
      cmd->add_option("--new-value", new_value, "Retuned control value; reports estimated and true margins");
    }
    if (e.task == Task::CompareLines) cmd->add_option("--input", input, "CSV written by table1");
    cmd->callback([&chosen, task = e.task] { chosen = task; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    Scenario s = build(*chosen, flags);
    if (target) s.target = target;
    if (!control.empty()) {
      const auto p = param_from_name(control);
      if (!p) throw Error(ErrorKind::ConfigError, "--control: unknown parameter '" + control + "'");
      s.control = *p;
    }
    if (new_value) s.new_value = new_value;
    if (!input.empty()) s.input = input;
    run(s, flags.out, std::cout);
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "hopfmargin: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "hopfmargin: " << e.what() << '\n';
    return kExitNumerical;
  }
}
