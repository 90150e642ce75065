#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bsde/assumptions.hpp"
#include "bsde/generators.hpp"

using namespace bsde;

TEST_CASE("lattice construction is deterministic") {
  auto a = default_lattice(1.0, 1, 5);
  auto b = default_lattice(1.0, 1, 5);
  CHECK(a.t_sample == b.t_sample);
  CHECK(a.y_sample == b.y_sample);
  CHECK(a.z_magnitudes == b.z_magnitudes);
  CHECK(a.b_sample == b.b_sample);
  CHECK(!a.t_sample.empty());
  CHECK(a.t_sample.front() > 0.0);
  CHECK(a.t_sample.back() <= 1.0);
}

TEST_CASE("example 1 passes its declared checks") {
  auto g = example1();
  auto lat = default_lattice(1.0, 1, 0);
  for (std::string id : {"H1", "H2", "H3", "H4", "remark1"}) {
    auto rep = run_check(g, lat, id);
    INFO("check ", id, " slack ", rep.worst_slack, " note ", rep.note);
    CHECK(rep.pass);
  }
  // the empirical monotonicity constant should be near the declared mu = 1
  auto h2 = check_H2(g, lat);
  CHECK(h2.empirical_constant <= 1.0 + 1e-6);
}

TEST_CASE("example 3 passes its declared checks") {
  auto g = example3(1.0);
  auto lat = default_lattice(1.0, 1, 0);
  for (std::string id : {"H1", "H2", "H2'", "H3", "H4", "H4'", "H4*",
                         "remark1"}) {
    auto rep = run_check(g, lat, id);
    INFO("check ", id, " slack ", rep.worst_slack, " note ", rep.note);
    CHECK(rep.pass);
  }
}

TEST_CASE("example 2 passes H5 and H1a") {
  auto g = example2();
  auto lat = default_lattice(1.0, 1, 0);
  auto reps = check_H5_and_H1a(g, lat);
  for (const auto& rep : reps) {
    INFO(rep.assumption, " slack ", rep.worst_slack, " note ", rep.note);
    CHECK(rep.pass);
  }
}

TEST_CASE("violators fail with a witness") {
  auto lat = default_lattice(1.0, 1, 0);

  // g = 2y increases in y: (H2) with mu = 1 must fail, and the empirical
  // constant should locate the true slope 2
  auto inc = generator_by_label("expr:2*y");
  auto h2 = check_H2(inc, lat);
  CHECK(!h2.pass);
  CHECK(h2.worst_slack > 0.0);
  CHECK(h2.empirical_constant == doctest::Approx(2.0).epsilon(0.05));

  // g = |z| is genuinely linear in z: (H4) with alpha = 1/2 must fail at
  // large |z|, with the witness out in the far field
  auto lin = generator_by_label("expr:normz");
  auto big = default_lattice(1.0, 1, 0, 1e6);
  auto h4 = check_H4_family(lin, big, Assumption::H4);
  CHECK(!h4.pass);
  CHECK(h4.worst_slack > 0.0);
  CHECK(euclid_norm(h4.witness.z) > 1e2);

  // discontinuous-in-y g fails (H1): unit jump at y = 0
  auto jump = generator_by_label("expr:(y>=0)");
  auto h1 = check_H1(jump, lat);
  CHECK(!h1.pass);
  CHECK(h1.worst_slack > 0.5);
}

TEST_CASE("H4'' implies the weaker growth conditions on the lattice") {
  // g = |z|^{1/2} is Holder(1/2) in z with gamma = 1
  GeneratorSpec g;
  g.label = "holder";
  g.d = 1;
  g.eval = [](double, std::span<const double>, double,
              std::span<const double> z) {
    return std::sqrt(std::fabs(z[0]));
  };
  g.params.gamma = 1.0;
  g.params.lambda = 1.0;
  g.params.alpha = 0.5;
  g.params.mu = 0.0;
  g.params.flags = {Assumption::H2, Assumption::H3, Assumption::H4,
                    Assumption::H4prime, Assumption::H4dprime};
  auto lat = default_lattice(1.0, 1, 0);
  auto reps = check_H4_implications(g, lat);
  REQUIRE(reps.size() >= 3);
  for (const auto& rep : reps) {
    INFO(rep.assumption, " slack ", rep.worst_slack, " note ", rep.note);
    CHECK(rep.pass);
  }
}

TEST_CASE("run_check rejects unknown ids") {
  auto g = example1();
  auto lat = default_lattice(1.0, 1, 0);
  CHECK_THROWS_AS(run_check(g, lat, "H99"), std::invalid_argument);
}

TEST_CASE("osgood classifier") {
  // int_0+ du/u diverges: the Osgood condition holds
  CHECK(classify_osgood([](double u) { return u; }) ==
        IntegralClass::Divergent);
  // int_0+ du/sqrt(u) = 2 sqrt(u) converges
  CHECK(classify_osgood([](double u) { return std::sqrt(u); }) ==
        IntegralClass::Convergent);
  // int_0+ du/u^2 diverges even faster than 1/u
  CHECK(classify_osgood([](double u) { return u * u; }) ==
        IntegralClass::Divergent);
  // u ln(1/u): integral of 1/(u ln(1/u)) = ln ln(1/u) -> infinity
  CHECK(classify_osgood([](double u) {
          return u > 0.0 && u < 1.0 ? u * std::log(1.0 / u) : u;
        }) == IntegralClass::Divergent);
}

TEST_CASE("witness reproduces the reported slack") {
  auto lat = default_lattice(1.0, 1, 0);
  auto inc = generator_by_label("expr:2*y");
  auto h2 = check_H2(inc, lat);
  REQUIRE(!h2.pass);
  // replay the monotonicity inequality at the stored witness pair
  const auto& p1 = h2.witness;
  const auto& p2 = h2.witness2;
  double g1 = inc(p1.t, p1.b, p1.y, p1.z);
  double g2 = inc(p2.t, p2.b, p2.y, p2.z);
  double dy = p1.y - p2.y;
  double lhs = (g1 - g2) * (dy > 0 ? 1.0 : -1.0);
  double rhs = inc.params.mu * std::fabs(dy);
  CHECK(lhs > rhs);  // the violation is real, not a tolerance artifact
}
