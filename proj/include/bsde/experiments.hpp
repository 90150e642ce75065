#ifndef BSDE_EXPERIMENTS_HPP
#define BSDE_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bsde/convolution.hpp"
#include "bsde/generators.hpp"
#include "bsde/solver.hpp"
#include "bsde/stochastic.hpp"

namespace bsde {

struct configuration_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Statistical tolerance in multiples of standard error plus deterministic
/// slack from the optimizer / regression layers.
struct TolerancePolicy {
  double stat_multiple = 3.0;
  double deterministic_slack = 1e-3;
  double tail_ratio_max = 0.5;
};

struct ExperimentSpec {
  std::string theorem;  // T1_minimal, T1_maximal, T2_compare, T3_levi,
                        // T4_lebesgue, T5_discontinuous, T6_compare_disc,
                        // T7_levi_disc, T8_lebesgue_disc, T9_compare_general,
                        // T10_uniqueness
  std::string generator = "example1";
  std::string terminal = "negAbsBT";
  std::string generator2;        // comparison runs; empty = same generator
  std::string terminal2;         // comparison runs; empty = same terminal
  double generator2_shift = 0.0; // g' = g + shift when generator2 is empty
  std::vector<int> n_list = {1, 2, 4, 8};
  std::vector<double> levels;    // truncation levels for the Levi/Lebesgue runs
  double T = 1.0;
  std::size_t N = 50;
  std::size_t M = 20000;
  int d = 1;
  std::uint64_t seed = 1;
  SolverConfig solver;
  double envelope_tol = 1e-4;
  TolerancePolicy tol;
  bool broken_control = false;   // T10: add the discontinuous-in-z counter-run
};

struct TableRow {
  double n_or_level = 0.0;
  double y0 = 0.0;
  double stderr_ = 0.0;
  double gap = 0.0;  // increment to the previous row (or min/max gap for T10)
  std::string verdict;
};

struct ExperimentReport {
  std::string theorem;
  bool pass = false;
  std::uint64_t seed = 0;
  std::vector<TableRow> rows;
  double tail_ratio = 0.0;
  std::map<std::string, double> scalars;  // named quantities (y0_h, gaps, ...)
  std::vector<std::string> messages;      // human-readable assertion log
};

ExperimentReport run_T1(const ExperimentSpec& spec);
ExperimentReport run_T2_T9(const ExperimentSpec& spec);
ExperimentReport run_T3_T4(const ExperimentSpec& spec);
ExperimentReport run_T5_T8(const ExperimentSpec& spec);
ExperimentReport run_T10(const ExperimentSpec& spec);

/// Dispatch on spec.theorem; throws configuration_error for unknown ids.
ExperimentReport run_experiment(const ExperimentSpec& spec);

}  // namespace bsde

#endif
