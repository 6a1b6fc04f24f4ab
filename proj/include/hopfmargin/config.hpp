#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "hopfmargin/hopf.hpp"
#include "hopfmargin/model.hpp"
#include "hopfmargin/params.hpp"

namespace hopfmargin {

enum class Task {
  Equilibrium,
  Scan,
  Margin,
  NormalVector,
  Sensitivity,
  Heatmap,
  Simulate,
  TableI,
  TableIV,
  CompareLines,
};

std::string_view to_string(Task task);
std::optional<Task> task_from_string(std::string_view text);

/// A single run request. Parameter overrides are in per-unit.
struct Scenario {
  Task task = Task::TableI;
  ParameterSet params = ParameterSet::nominal();
  LineModel line = LineModel::Static;

  std::optional<Param> param;           // scan/margin/nvec/sens: the cause parameter
  std::optional<Direction> direction;   // defaults to the known destabilizing direction
  std::optional<double> target;         // equilibrium: continue `param` to this value

  // sens: change `control` to `new_value` and compare estimated and true margins.
  std::optional<Param> control;
  std::optional<double> new_value;

  // simulate
  bool at_hopf = false;           // place `param` at its Hopf value before integrating
  double perturbation = 1e-3;     // added to theta
  double t_end = 300.0;
  double dt = 0.01;
  double window = 50.0;
  double rtol = 1e-8;

  // compare-lines: a table written by the table1 task
  std::optional<std::string> input;

  unsigned threads = 0;  // 0 defers to HOPFMARGIN_THREADS / hardware concurrency
};

/// Parses the scenario format:
///
///   [scenario]
///   task = simulate
///   line = static
///   param = X
///   [params]
///   K_VC_F = 0.98
///
/// Throws ConfigError naming the line and field on any malformed entry.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);

/// Throws ConfigError when task-specific options are missing.
void validate_scenario(const Scenario& scenario);

}  // namespace hopfmargin
