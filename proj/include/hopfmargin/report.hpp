#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hopfmargin/hopf.hpp"
#include "hopfmargin/model.hpp"
#include "hopfmargin/normal_vector.hpp"
#include "hopfmargin/params.hpp"

namespace hopfmargin {

/// Nine significant digits; the printed text re-parses to a value that prints identically.
std::string format_number(double value);

struct MarginEntry {
  enum class Status { Found, NoBifurcation, Excluded };
  Status status = Status::NoBifurcation;
  double hopf_value = 0.0;  // p.u.
  double margin = 0.0;      // p.u.
  std::optional<Direction> direction;
  std::optional<double> omega_star;
  std::string note;
};

struct MarginReport {
  LineModel line = LineModel::Static;
  std::vector<Param> params;
  std::vector<MarginEntry> entries;

  const MarginEntry* find(Param p) const;
};

/// Row order of the parameter/margin table.
const std::vector<Param>& table1_parameters();

/// Scans every table parameter on one line model. Parameters without a known
/// destabilizing direction are scanned both ways; the first crossing wins.
MarginReport compute_margins(const ParameterSet& nominal, LineModel line, unsigned threads = 1);

/// CSV: parameter,nominal,hopf_static,hopf_dynamic,margin_static,margin_dynamic.
/// Values in display units; "null" marks no bifurcation, "-" marks excluded parameters.
void write_table1_csv(std::ostream& out, const ParameterSet& nominal, const MarginReport& static_report,
                      const MarginReport& dynamic_report);

/// Reads a table written by write_table1_csv back into the two reports.
std::pair<MarginReport, MarginReport> read_table1_csv(std::istream& in);

struct LineComparison {
  struct Row {
    Param param;
    std::optional<double> margin_static;
    std::optional<double> margin_dynamic;
    std::optional<double> delta;     // static - dynamic, p.u.
    std::optional<double> relative;  // delta / static
  };
  std::vector<Row> rows;
  bool uniform_reduction = true;
  std::optional<Param> largest_absolute;
  std::optional<Param> largest_relative;
};

/// Per-parameter margin reduction from the static to the dynamic line.
/// Throws MismatchedReports when the parameter lists differ.
LineComparison compare_lines(const MarginReport& static_report, const MarginReport& dynamic_report);

void write_comparison_csv(std::ostream& out, const LineComparison& cmp);

/// Row-normalized heatmap CSV: cause,direction,<22 parameter columns>.
void write_heatmap_csv(std::ostream& out, const SensitivityReport& report);
/// Raw values, normalized values and best control per row.
std::string heatmap_json(const SensitivityReport& report);

/// cause,direction,control_static,sensitivity_static,control_dynamic,sensitivity_dynamic
void write_table4_csv(std::ostream& out, const SensitivityReport& static_report, const SensitivityReport& dynamic_report);

}  // namespace hopfmargin
