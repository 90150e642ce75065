#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "bsde/stochastic.hpp"

using namespace bsde;

TEST_CASE("make_grid produces uniform grids") {
  auto g1 = make_grid(1.0, 1);
  REQUIRE(g1.nodes.size() == 2);
  CHECK(g1.nodes[0] == 0.0);
  CHECK(g1.nodes[1] == 1.0);

  auto g4 = make_grid(1.0, 4);
  REQUIRE(g4.nodes.size() == 5);
  CHECK(g4.nodes[1] == doctest::Approx(0.25));
  CHECK(g4.nodes[2] == doctest::Approx(0.5));
  CHECK(g4.nodes[3] == doctest::Approx(0.75));
  CHECK(g4.nodes[4] == 1.0);

  auto g5 = make_grid(0.5, 5);
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(g5.dt(i) == doctest::Approx(0.1));

  CHECK_THROWS_AS(make_grid(0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(-1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1.0, 0), std::invalid_argument);
}

TEST_CASE("same seed gives bit-identical bundles") {
  auto grid = make_grid(1.0, 16);
  auto a = simulate_paths(grid, 2, 64, 99);
  auto b = simulate_paths(grid, 2, 64, 99);
  REQUIRE(a.increments.size() == b.increments.size());
  for (std::size_t i = 0; i < a.increments.size(); ++i)
    CHECK(a.increments[i] == b.increments[i]);  // bitwise, not approx

  auto c = simulate_paths(grid, 2, 64, 100);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.increments.size(); ++i)
    if (a.increments[i] != c.increments[i]) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("brownian_at reconstructs prefix sums") {
  auto grid = make_grid(2.0, 8);
  auto bundle = simulate_paths(grid, 3, 5, 7);
  for (std::size_t m = 0; m < 5; ++m) {
    auto b0 = brownian_at(bundle, m, 0);
    for (double x : b0) CHECK(x == 0.0);
    for (std::size_t i = 0; i < 8; ++i) {
      auto lo = brownian_at(bundle, m, i);
      auto hi = brownian_at(bundle, m, i + 1);
      for (std::size_t c = 0; c < 3; ++c)
        CHECK(hi[c] - lo[c] == doctest::Approx(bundle.increment(m, i, c))
                                   .epsilon(1e-12));
    }
    // terminal value telescopes to the increment total
    auto bN = brownian_at(bundle, m, 8);
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < 8; ++i) s += bundle.increment(m, i, c);
      CHECK(bN[c] == doctest::Approx(s).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(brownian_at(bundle, 5, 0), std::out_of_range);
  CHECK_THROWS_AS(brownian_at(bundle, 0, 9), std::out_of_range);
}

TEST_CASE("terminal sample moments match the CLT budget") {
  const double T = 1.0;
  const std::size_t M = 100000;
  auto grid = make_grid(T, 1);
  auto bundle = simulate_paths(grid, 1, M, 4242);
  double mean = 0.0, var = 0.0;
  for (std::size_t m = 0; m < M; ++m) mean += bundle.increment(m, 0, 0);
  mean /= double(M);
  for (std::size_t m = 0; m < M; ++m) {
    double d = bundle.increment(m, 0, 0) - mean;
    var += d * d;
  }
  var /= double(M - 1);
  CHECK(std::fabs(mean) <= 4.0 * std::sqrt(T / double(M)));
  CHECK(std::fabs(var - T) <= 0.02 * T);  // chi-square band at M = 1e5
}

TEST_CASE("cross-component increments are uncorrelated") {
  auto grid = make_grid(1.0, 10);
  const std::size_t M = 20000;
  auto bundle = simulate_paths(grid, 2, M, 11);
  double cov = 0.0;
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t i = 0; i < 10; ++i)
      cov += bundle.increment(m, i, 0) * bundle.increment(m, i, 1);
  cov /= double(M * 10);
  // increments have variance dt = 0.1 per component; the product has sd
  // 0.1, so the mean over 2e5 samples has sd ~ 2.2e-4
  CHECK(std::fabs(cov) < 4.0 * 0.1 / std::sqrt(double(M * 10)));
}

TEST_CASE("increment cap raises a resource error") {
  auto grid = make_grid(1.0, 100);
  CHECK_THROWS_AS(simulate_paths(grid, 1, 1000, 0, PathMode::Direct, 50000),
                  resource_error);
  CHECK_NOTHROW(simulate_paths(grid, 1, 10, 0, PathMode::Direct, 50000));
}

TEST_CASE("nested mode agrees on shared nodes across refinement") {
  auto coarse = simulate_paths(make_grid(1.0, 8), 1, 40, 31, PathMode::Nested);
  auto fine = simulate_paths(make_grid(1.0, 16), 1, 40, 31, PathMode::Nested);
  for (std::size_t m = 0; m < 40; ++m)
    for (std::size_t i = 0; i <= 8; ++i) {
      auto a = brownian_at(coarse, m, i);
      auto b = brownian_at(fine, m, 2 * i);
      CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-12));
    }
}

TEST_CASE("bundle save/load round-trips bit-for-bit") {
  auto grid = make_grid(0.75, 6);
  auto bundle = simulate_paths(grid, 2, 13, 77);

  std::stringstream ss;
  save_bundle(bundle, ss);
  auto back = load_bundle(ss);
  CHECK(back.grid.horizon == bundle.grid.horizon);
  CHECK(back.grid.n_steps == bundle.grid.n_steps);
  CHECK(back.dim == bundle.dim);
  CHECK(back.path_count == bundle.path_count);
  CHECK(back.seed == bundle.seed);
  REQUIRE(back.increments.size() == bundle.increments.size());
  for (std::size_t i = 0; i < bundle.increments.size(); ++i)
    CHECK(back.increments[i] == bundle.increments[i]);

  auto path = std::filesystem::temp_directory_path() / "bundle_rt.bin";
  save_bundle(bundle, path.string());
  auto disk = load_bundle(path.string());
  CHECK(disk.increments == bundle.increments);
  std::filesystem::remove(path);
}

TEST_CASE("load rejects a corrupted header") {
  std::stringstream ss;
  ss << "not a bundle at all";
  CHECK_THROWS(load_bundle(ss));
}
