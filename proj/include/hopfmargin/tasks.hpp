#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "hopfmargin/config.hpp"
#include "hopfmargin/error.hpp"
#include "hopfmargin/hopf.hpp"
#include "hopfmargin/simulator.hpp"

namespace hopfmargin {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitNoBifurcation = 3,
  kExitNumerical = 4,
  kExitIo = 5,
};

int exit_code_for(ErrorKind kind);

/// First-order margin prediction after retuning one control parameter,
/// compared against the re-located Hopf point.
struct MarginPrediction {
  Param cause;
  Direction direction;
  Param control;
  double old_control = 0.0;
  double new_control = 0.0;
  double old_margin = 0.0;
  double margin_sensitivity = 0.0;
  double bifurcation_sensitivity = 0.0;
  double estimated_margin = 0.0;
  double true_margin = 0.0;
  double new_hopf_value = 0.0;
};

MarginPrediction predict_margin(const ParameterSet& nominal, LineModel line, Param cause, Direction direction,
                                Param control, double new_value);

struct SimulationRun {
  ParameterSet params;             // parameters actually integrated
  std::optional<HopfPoint> hopf;   // set when the scenario starts at a Hopf point
  StateVector x0;
  Trajectory trajectory;
  Classification classification;
};

/// Builds the initial condition (equilibrium plus a theta perturbation) and integrates.
SimulationRun simulate_scenario(const Scenario& scenario);

/// Runs one scenario, writing artifacts into `out_dir` and a JSON summary to
/// `summary`. Output is deterministic for a fixed scenario. Throws Error.
void run(const Scenario& scenario, const std::filesystem::path& out_dir, std::ostream& summary);

}  // namespace hopfmargin
