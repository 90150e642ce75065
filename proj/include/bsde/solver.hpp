#ifndef BSDE_SOLVER_HPP
#define BSDE_SOLVER_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsde/generators.hpp"
#include "bsde/stochastic.hpp"

namespace bsde {

struct basis_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct step_failure : std::runtime_error {
  std::size_t step;
  step_failure(const std::string& what, std::size_t step_index)
      : std::runtime_error(what), step(step_index) {}
};

struct BasisSpec {
  enum class Type { Polynomial, PiecewiseConstant };
  Type type = Type::Polynomial;
  int degree = 3;  // global polynomial degree in B_{t_i}
  int bins = 50;   // equiprobable bins for the local basis
};

enum class TruncationMode {
  Clamp,  // clamp xi to [-L, L] (dominated-convergence families)
  Min     // xi ^ L (monotone families, xi bounded below)
};

struct SolverConfig {
  BasisSpec basis;
  int picard_iters = 20;
  double picard_tol = 1e-10;
  std::optional<double> terminal_truncation;  // clamp level L
  TruncationMode truncation_mode = TruncationMode::Clamp;
};

struct Diagnostics {
  std::map<double, double> s_beta;         // beta -> E[sup_t |Y_t|^beta]
  std::map<double, double> s_beta_stderr;
  std::map<double, double> m_beta;         // beta -> E[(int |Z|^2 dt)^{beta/2}]
  std::map<double, double> m_beta_stderr;
  std::vector<double> regression_rms;      // per backward step
  std::vector<double> regression_max;
  std::vector<int> picard_counts;          // max iterations used per step
  double eps_reg = 0.0;                    // max over steps of rms residual
  double y0_stderr = 0.0;
};

/// Discrete (Y, Z) on the bundle's grid. Y is M x (N+1), Z is M x N
/// (d = 1), both row-major in the path index.
struct SolveResult {
  std::size_t path_count = 0;
  std::size_t n_steps = 0;
  std::vector<double> Y;
  std::vector<double> Z;
  double y0 = 0.0;
  Diagnostics diagnostics;

  double y(std::size_t m, std::size_t i) const { return Y[m * (n_steps + 1) + i]; }
  double z(std::size_t m, std::size_t i) const { return Z[m * n_steps + i]; }
};

/// Backward-Euler regression scheme: implicit in y (Picard fixed point),
/// explicit in z, with g evaluated at subinterval midpoints.
SolveResult solve(const TerminalCondition& xi, const GeneratorSpec& g,
                  const PathBundle& paths, const SolverConfig& cfg);

std::vector<SolveResult> solve_truncated_family(
    const TerminalCondition& xi, const GeneratorSpec& g,
    const PathBundle& paths, const SolverConfig& cfg,
    const std::vector<double>& levels,
    TruncationMode mode = TruncationMode::Min);

/// Recomputes the S^beta / M^beta estimates for a finished solve.
Diagnostics diagnostics_report(const SolveResult& result, const TimeGrid& grid,
                               const std::vector<double>& betas = {0.25, 0.5,
                                                                   0.75});

}  // namespace bsde

#endif
