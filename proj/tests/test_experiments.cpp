#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bsde/experiments.hpp"

using namespace bsde;

namespace {
ExperimentSpec small_spec(const std::string& theorem) {
  ExperimentSpec s;
  s.theorem = theorem;
  s.N = 20;
  s.M = 500;
  s.seed = 7;
  return s;
}
}  // namespace

TEST_CASE("minimal-solution ladder on a z-independent generator") {
  // g = -y is untouched by the inf-convolution, so every rung of the
  // ladder solves the same equation and the gaps are pure noise
  auto spec = small_spec("T1_minimal");
  spec.generator = "expr:0 - y";
  spec.terminal = "BT";
  spec.n_list = {1, 2, 4};
  auto rep = run_experiment(spec);
  CHECK(rep.pass);
  REQUIRE(rep.rows.size() >= 3);
  for (std::size_t k = 1; k < 3; ++k)
    CHECK(std::fabs(rep.rows[k].y0 - rep.rows[0].y0) < 1e-3);
  CHECK(rep.theorem == "T1_minimal");
  CHECK(rep.seed == 7);
}

TEST_CASE("identical specs give identical reports") {
  auto spec = small_spec("T1_minimal");
  spec.generator = "example1";
  spec.terminal = "negAbsBT";
  spec.n_list = {1, 2};
  auto a = run_experiment(spec);
  auto b = run_experiment(spec);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].y0 == b.rows[k].y0);  // bitwise
    CHECK(a.rows[k].stderr_ == b.rows[k].stderr_);
  }
  CHECK(a.scalars == b.scalars);
}

TEST_CASE("comparison run with a shifted generator") {
  // g' = g + c dominates g, so y0' - y0 = c*T exactly for y,z-independent g
  auto spec = small_spec("T2_compare");
  spec.generator = "expr:b1";
  spec.terminal = "BT";
  spec.generator2_shift = 0.25;
  auto rep = run_experiment(spec);
  CHECK(rep.pass);
  CHECK(rep.scalars.at("y0_gap") == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(rep.scalars.at("violation_rate") == 0.0);
}

TEST_CASE("comparison precheck refuses unordered inputs") {
  auto spec = small_spec("T2_compare");
  spec.generator = "expr:y";
  spec.generator2 = "expr:0 - y";  // neither dominates the other
  spec.terminal = "BT";
  CHECK_THROWS_AS(run_experiment(spec), configuration_error);
}

TEST_CASE("levi family with a bounded terminal is flat") {
  // xi = min(B_T^2, 1) is already below every level >= 1, so all the
  // truncated solves coincide with the full one
  auto spec = small_spec("T3_levi");
  spec.generator = "expr:0";
  spec.terminal = "expr:min(b1*b1, 1)";
  spec.levels = {1.0, 2.0, 4.0};
  auto rep = run_experiment(spec);
  CHECK(rep.pass);
  REQUIRE(rep.rows.size() >= 3);
  for (const auto& row : rep.rows)
    CHECK(row.y0 == doctest::Approx(rep.rows[0].y0).epsilon(1e-10));
  CHECK(rep.scalars.at("limit_gap") < 1e-10);
}

TEST_CASE("discontinuous-generator run on example 2") {
  auto spec = small_spec("T5_discontinuous");
  spec.generator = "example2";
  spec.terminal = "zero";
  spec.n_list = {1, 2, 4, 8};
  auto rep = run_experiment(spec);
  INFO("messages:");
  for (const auto& m : rep.messages) INFO("  ", m);
  CHECK(rep.pass);
  REQUIRE(rep.rows.size() == 4);
  // minimal solutions rise with n and stay below the linear-growth dominator
  for (std::size_t k = 1; k < rep.rows.size(); ++k)
    CHECK(rep.rows[k].y0 >= rep.rows[k - 1].y0 - 0.05);
  CHECK(rep.rows.back().y0 <= rep.scalars.at("y0_dominator") + 0.1);
}

TEST_CASE("unknown theorem id is a configuration error") {
  auto spec = small_spec("T99_nope");
  CHECK_THROWS_AS(run_experiment(spec), configuration_error);
}

TEST_CASE("missing required flags are a configuration error") {
  auto spec = small_spec("T1_minimal");
  spec.generator = "example2";  // lacks (H4), the z-ladder needs it
  CHECK_THROWS_AS(run_experiment(spec), configuration_error);
}
