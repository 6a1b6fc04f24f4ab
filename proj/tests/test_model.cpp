#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "hopfmargin/equilibrium.hpp"
#include "hopfmargin/error.hpp"
#include "hopfmargin/model.hpp"
#include "oracles.hpp"

using namespace hopfmargin;

TEST_CASE("rotate_dq examples") {
  const auto a = rotate_dq(0.0, {0.3, -0.7});
  CHECK(a[0] == 0.3);
  CHECK(a[1] == -0.7);
  const auto b = rotate_dq(std::numbers::pi / 2, {1.0, 0.0});
  CHECK(b[0] == Catch::Approx(0.0).margin(1e-15));
  CHECK(b[1] == Catch::Approx(1.0));
}

TEST_CASE("rotation is orthogonal and inverted by the opposite angle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int k = 0; k < 100; ++k) {
    const double th = u(rng);
    const std::array<double, 2> v{u(rng), u(rng)};
    const auto r = rotate_dq(th, v);
    CHECK(std::hypot(r[0], r[1]) == Catch::Approx(std::hypot(v[0], v[1])).epsilon(1e-14));
    const auto back = rotate_dq(-th, r);
    CHECK(back[0] == Catch::Approx(v[0]).margin(1e-13));
    CHECK(back[1] == Catch::Approx(v[1]).margin(1e-13));
  }
}

TEST_CASE("state dimensions") {
  CHECK(state_dimension(LineModel::Static) == 11);
  CHECK(state_dimension(LineModel::Dynamic) == 13);
  CHECK(line_from_string("dynamic") == LineModel::Dynamic);
  CHECK_THROWS_AS(line_from_string("quasi"), Error);
}

TEST_CASE("filtered active power is stationary at equilibrium") {
  for (LineModel line : {LineModel::Static, LineModel::Dynamic}) {
    const ParameterSet ps = ParameterSet::nominal();
    const StateVector x = solve_equilibrium(ps, line).state;
    const Outputs o = outputs(x, ps, line);
    CHECK(rhs(x, ps, line)[index(State::p_tilde)] == Catch::Approx(0.0).margin(1e-10));
    CHECK(o.p == Catch::Approx(x[index(State::p_tilde)]).margin(1e-12));
  }
}

TEST_CASE("rhs rejects wrong dimensions and non-finite input") {
  const ParameterSet ps = ParameterSet::nominal();
  const StateVector x = solve_equilibrium(ps, LineModel::Static).state;
  try {
    rhs(x, ps, LineModel::Dynamic);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
  StateVector bad = x;
  bad[2] = std::numeric_limits<double>::infinity();
  try {
    rhs(bad, ps, LineModel::Static);
    FAIL("expected NonFiniteInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteInput);
  }
  CHECK_THROWS_AS(rhs(x, ps.with(Param::X, std::nan("")), LineModel::Static), Error);
}

TEST_CASE("closed-form rhs agrees with the solved algebraic system") {
  std::mt19937_64 rng(2024);
  for (LineModel line : {LineModel::Static, LineModel::Dynamic}) {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const ParameterSet ps = oracle::random_params(rng);
      const StateVector x = oracle::random_state(rng, line);
      const StateVector f = rhs(x, ps, line);
      const StateVector g = oracle::dae_rhs(x, ps, line);
      worst = std::max(worst, oracle::rel_error(f, g));
    }
    INFO(to_string(line) << " worst normwise error " << worst);
    CHECK(worst <= 1e-10);
  }
}
