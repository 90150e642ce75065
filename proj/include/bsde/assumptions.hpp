#ifndef BSDE_ASSUMPTIONS_HPP
#define BSDE_ASSUMPTIONS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bsde/convolution.hpp"
#include "bsde/generators.hpp"

namespace bsde {

/// Sampling lattice the checkers quantify over. Everything is a pure
/// function of (T, d, seed, z_max), so witnesses are reproducible.
struct Lattice {
  double T = 1.0;
  int d = 1;
  std::uint64_t seed = 0;
  std::vector<double> t_sample;
  std::vector<std::vector<double>> b_sample;
  std::vector<double> y_sample;
  std::vector<double> z_magnitudes;
  std::size_t pair_count = 10000;
  double z_max = 1e4;
};

Lattice default_lattice(double T = 1.0, int d = 1, std::uint64_t seed = 0,
                        double z_max = 1e4);

/// Checkers are semi-decisions: "pass" means no violation found on the
/// lattice, "fail" carries a reproducible witness.
struct CheckReport {
  std::string assumption;
  bool pass = true;
  double worst_slack = 0.0;  // max of (lhs - rhs); positive means violated
  EvalPoint witness;         // first point of the worst pair
  EvalPoint witness2;        // second point where the check is pairwise
  double empirical_constant = 0.0;  // e.g. smallest mu / C that would pass
  std::string note;
};

CheckReport check_H1(const GeneratorSpec& g, const Lattice& lattice);
CheckReport check_H2(const GeneratorSpec& g, const Lattice& lattice);
CheckReport check_H3(const GeneratorSpec& g, const Lattice& lattice);
CheckReport check_H4_family(const GeneratorSpec& g, const Lattice& lattice,
                            Assumption variant);
CheckReport check_H2prime(const GeneratorSpec& g, const Lattice& lattice);
CheckReport check_H4star(const GeneratorSpec& g, const Lattice& lattice);
CheckReport check_H5(const GeneratorSpec& g, const Lattice& lattice);
CheckReport check_H1a(const GeneratorSpec& g, const Lattice& lattice);

std::vector<CheckReport> check_H2prime_H4star(const GeneratorSpec& g,
                                              const Lattice& lattice);
std::vector<CheckReport> check_H5_and_H1a(const GeneratorSpec& g,
                                          const Lattice& lattice);

/// Empirical side of (H4'') => (H4') => (H4): if the lattice passes (H4'')
/// at (gamma, alpha), the derived constants are tested for the weaker
/// variants as well.
std::vector<CheckReport> check_H4_implications(const GeneratorSpec& g,
                                               const Lattice& lattice);

/// Remark-1 growth inequality tested through generators::remark1_bound.
CheckReport check_remark1(const GeneratorSpec& g, const Lattice& lattice);

/// Dispatch by assumption id ("H1", "H2", "H2'", "H3", "H4", "H4'",
/// "H4''", "H4*", "H5", "H1a", "remark1").
CheckReport run_check(const GeneratorSpec& g, const Lattice& lattice,
                      const std::string& id);

enum class IntegralClass { Divergent, Convergent };

/// Classifies whether the Osgood integral of 1/rho over (0, 1] diverges,
/// by watching the increments of the truncated integral as the lower
/// endpoint shrinks by decades.
IntegralClass classify_osgood(const std::function<double(double)>& rho);

}  // namespace bsde

#endif
