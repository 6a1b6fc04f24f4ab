#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "hopfmargin/config.hpp"
#include "hopfmargin/error.hpp"
#include "hopfmargin/report.hpp"
#include "hopfmargin/tasks.hpp"

using namespace hopfmargin;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::IoError;
}

MarginReport fake_report(LineModel line, double scale) {
  MarginReport r;
  r.line = line;
  r.params = {Param::X, Param::K_Q, Param::omega0};
  MarginEntry x;
  x.status = MarginEntry::Status::Found;
  x.hopf_value = 0.1;
  x.margin = 0.1 * scale;
  MarginEntry kq;
  kq.status = MarginEntry::Status::Found;
  kq.hopf_value = 0.39;
  kq.margin = 0.39 * scale * scale;
  MarginEntry ex;
  ex.status = MarginEntry::Status::Excluded;
  r.entries = {x, kq, ex};
  return r;
}

}  // namespace

TEST_CASE("numbers print with nine significant digits and re-parse exactly") {
  CHECK(format_number(0.08404) == "0.08404");
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(-0.0) == "0");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int k = 0; k < 1000; ++k) {
    const double v = std::pow(10.0, u(rng)) * (k % 2 ? -1 : 1);
    const std::string s = format_number(v);
    CHECK(format_number(std::stod(s)) == s);
  }
}

TEST_CASE("table round-trips through CSV with distinct null and excluded encodings") {
  const MarginReport s = fake_report(LineModel::Static, 1.0);
  MarginReport d = fake_report(LineModel::Dynamic, 0.9);
  d.entries[1].status = MarginEntry::Status::NoBifurcation;
  std::ostringstream out;
  write_table1_csv(out, ParameterSet::nominal(), s, d);
  const std::string csv = out.str();
  CHECK(csv.rfind("parameter,nominal,hopf_static,hopf_dynamic,margin_static,margin_dynamic\n", 0) == 0);
  CHECK(csv.find("K_Q,0.01,39,null,39,null") != std::string::npos);
  CHECK(csv.find("omega0,1,-,-,-,-") != std::string::npos);

  std::istringstream in(csv);
  const auto [s2, d2] = read_table1_csv(in);
  CHECK(s2.params == s.params);
  CHECK(s2.entries[0].margin == Catch::Approx(0.1));
  CHECK(d2.entries[1].status == MarginEntry::Status::NoBifurcation);
  CHECK(s2.entries[2].status == MarginEntry::Status::Excluded);
}

TEST_CASE("line comparison") {
  const MarginReport s = fake_report(LineModel::Static, 1.0);
  const MarginReport d = fake_report(LineModel::Dynamic, 0.9);
  const LineComparison c = compare_lines(s, d);
  CHECK(c.uniform_reduction);
  CHECK(c.largest_absolute == Param::K_Q);
  CHECK(c.largest_relative == Param::K_Q);
  CHECK(*c.rows[0].delta == Catch::Approx(0.01));
  CHECK_FALSE(c.rows[2].delta);

  MarginReport same = s;
  same.line = LineModel::Dynamic;
  for (const auto& row : compare_lines(s, same).rows) {
    if (row.delta) CHECK(*row.delta == 0.0);
  }

  const LineComparison flipped = compare_lines(fake_report(LineModel::Static, 0.9), fake_report(LineModel::Dynamic, 1.0));
  CHECK_FALSE(flipped.uniform_reduction);

  MarginReport other = d;
  other.params[0] = Param::R;
  CHECK(kind_of([&] { compare_lines(s, other); }) == ErrorKind::MismatchedReports);
  CHECK(kind_of([&] { compare_lines(d, s); }) == ErrorKind::MismatchedReports);
}

TEST_CASE("scenario parsing") {
  std::istringstream in(
      "# onset check\n[scenario]\ntask = simulate\nline = dynamic\nparam = X\nat_hopf = true\n"
      "control = K_VC_F\nnew_value = 0.98\nt_end = 100\n\n[params]\nR = 0.03\n");
  const Scenario s = parse_scenario(in);
  CHECK(s.task == Task::Simulate);
  CHECK(s.line == LineModel::Dynamic);
  CHECK(s.param == Param::X);
  CHECK(s.at_hopf);
  CHECK(s.control == Param::K_VC_F);
  CHECK(s.new_value == 0.98);
  CHECK(s.t_end == 100.0);
  CHECK(s.params[Param::R] == 0.03);
  CHECK_NOTHROW(validate_scenario(s));
}

TEST_CASE("scenario errors carry line and field") {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_scenario(in);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ConfigError);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("[scenario]\ntask = dance\n").find("line 2, field 'task'") != std::string::npos);
  CHECK(message("[params]\nX = abc\n").find("line 2, field 'X'") != std::string::npos);
  CHECK(message("[params]\nY = 1\n").find("unknown parameter") != std::string::npos);
  CHECK(message("X = 1\n").find("outside of a section") != std::string::npos);
  CHECK(message("[scenario]\nline = wobbly\n").find("field 'line'") != std::string::npos);
  CHECK(message("[other]\n").find("unknown section") != std::string::npos);
  CHECK(message("[params]\nL_f = 0\n").find("L_f") != std::string::npos);

  Scenario s;
  s.task = Task::Scan;
  CHECK(kind_of([&] { validate_scenario(s); }) == ErrorKind::ConfigError);
  s.param = Param::V0;
  CHECK(kind_of([&] { validate_scenario(s); }) == ErrorKind::ConfigError);
}

TEST_CASE("exit codes distinguish failure classes") {
  CHECK(exit_code_for(ErrorKind::NoBifurcation) == kExitNoBifurcation);
  CHECK(exit_code_for(ErrorKind::ConfigError) == kExitConfig);
  CHECK(exit_code_for(ErrorKind::IoError) == kExitIo);
  CHECK(exit_code_for(ErrorKind::SingularJacobian) == kExitNumerical);
  CHECK(exit_code_for(ErrorKind::EigenvalueCollision) == kExitNumerical);
  CHECK(kExitNoBifurcation != kExitNumerical);
}

TEST_CASE("heatmap rows are normalized to unit max") {
  Scenario s;
  s.task = Task::Heatmap;
  s.threads = 4;
  const fs::path dir = fs::temp_directory_path() / "hopfmargin_heatmap_test";
  std::ostringstream summary;
  run(s, dir, summary);
  std::ifstream in(dir / "heatmap_static.csv");
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    double m = 0.0;
    bool missing = false;
    while (std::getline(ss, cell, ',')) {
      if (cell == "null") missing = true;
      else m = std::max(m, std::abs(std::stod(cell)));
    }
    if (!missing) {
      CHECK(m == Catch::Approx(1.0).epsilon(1e-8));
      ++rows;
    }
  }
  CHECK(rows >= 10);
  CHECK(fs::exists(dir / "heatmap_static.json"));
}

TEST_CASE("running a scenario twice gives byte-identical artifacts") {
  const fs::path a = fs::temp_directory_path() / "hopfmargin_det_a";
  const fs::path b = fs::temp_directory_path() / "hopfmargin_det_b";
  Scenario s;
  s.task = Task::TableI;
  std::ostringstream sa, sb;
  s.threads = 4;
  run(s, a, sa);
  s.threads = 1;
  run(s, b, sb);
  CHECK(sa.str() == sb.str());
  CHECK(slurp(a / "table1.csv") == slurp(b / "table1.csv"));
  CHECK(slurp(a / "comparison.csv") == slurp(b / "comparison.csv"));

  // compare-lines on the written table reproduces the comparison.
  Scenario c;
  c.task = Task::CompareLines;
  c.input = (a / "table1.csv").string();
  const fs::path cdir = fs::temp_directory_path() / "hopfmargin_det_c";
  std::ostringstream sc;
  run(c, cdir, sc);
  CHECK(slurp(cdir / "comparison.csv") == slurp(a / "comparison.csv"));
}

TEST_CASE("simulation scenario writes a classified trajectory") {
  Scenario s;
  s.task = Task::Simulate;
  s.param = Param::X;
  s.at_hopf = true;
  s.control = Param::K_VC_F;
  s.new_value = 0.98;
  s.t_end = 200.0;
  const fs::path dir = fs::temp_directory_path() / "hopfmargin_sim";
  std::ostringstream summary;
  run(s, dir, summary);
  CHECK(summary.str().find("\"classification\": \"converged\"") != std::string::npos);
  CHECK(fs::file_size(dir / "trajectory.csv") > 1000);
}

TEST_CASE("missing input file is an IO error") {
  Scenario s;
  s.task = Task::CompareLines;
  s.input = "/nonexistent/table1.csv";
  std::ostringstream out;
  CHECK(kind_of([&] { run(s, fs::temp_directory_path() / "hopfmargin_io", out); }) == ErrorKind::IoError);
}
