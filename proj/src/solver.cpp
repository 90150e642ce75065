#include "bsde/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bsde {

namespace {

constexpr double kConditionLimit = 1e12;

struct Basis {
  BasisSpec spec;
  // standardization for the polynomial basis / bin edges for the local one
  double shift = 0.0;
  double scale = 1.0;
  std::vector<double> edges;
  int K = 1;

  void fit(const std::vector<double>& x, bool constant_only) {
    if (constant_only) {
      K = 1;
      return;
    }
    if (spec.type == BasisSpec::Type::Polynomial) {
      K = spec.degree + 1;
      const double mean =
          std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
      double var = 0.0;
      for (double v : x) var += (v - mean) * (v - mean);
      var /= static_cast<double>(x.size());
      shift = mean;
      scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    } else {
      K = spec.bins;
      std::vector<double> sorted = x;
      std::sort(sorted.begin(), sorted.end());
      edges.resize(static_cast<std::size_t>(K) - 1);
      const std::size_t M = sorted.size();
      for (int k = 1; k < K; ++k)
        edges[static_cast<std::size_t>(k) - 1] =
            sorted[std::min(M - 1, k * M / static_cast<std::size_t>(K))];
    }
  }

  void row(double x, double* phi) const {
    if (K == 1) {
      phi[0] = 1.0;
      return;
    }
    if (spec.type == BasisSpec::Type::Polynomial) {
      const double s = (x - shift) * scale;
      phi[0] = 1.0;
      for (int k = 1; k < K; ++k) phi[k] = phi[k - 1] * s;
    } else {
      const auto it = std::upper_bound(edges.begin(), edges.end(), x);
      const int bin = static_cast<int>(it - edges.begin());
      for (int k = 0; k < K; ++k) phi[k] = k == bin ? 1.0 : 0.0;
    }
  }
};

double truncate_terminal(double v, double L, TruncationMode mode) {
  if (mode == TruncationMode::Min) return std::fmin(v, L);
  return std::clamp(v, -L, L);
}

}  // namespace

SolveResult solve(const TerminalCondition& xi, const GeneratorSpec& g,
                  const PathBundle& paths, const SolverConfig& cfg) {
  if (paths.dim != 1)
    throw std::invalid_argument("solve: only d = 1 path bundles are supported");
  if (g.d != 1)
    throw std::invalid_argument("solve: generator dimension must be 1");
  const std::size_t M = paths.path_count;
  const std::size_t N = paths.grid.n_steps;
  const auto& nodes = paths.grid.nodes;
  if (g.has(Assumption::H2)) {
    const double max_dt = paths.grid.horizon / static_cast<double>(N);
    if (max_dt * g.params.mu >= 1.0)
      throw std::invalid_argument(
          "solve: dt*mu must be below 1 for the implicit y-step to contract");
  }
  if (cfg.basis.type == BasisSpec::Type::Polynomial && cfg.basis.degree < 1)
    throw std::invalid_argument("solve: polynomial degree must be at least 1");
  if (cfg.basis.type == BasisSpec::Type::PiecewiseConstant && cfg.basis.bins < 2)
    throw std::invalid_argument("solve: local basis needs at least 2 bins");

  // forward values B_{t_i}, prefix-summed left to right
  std::vector<double> B(M * (N + 1));
  for (std::size_t m = 0; m < M; ++m) {
    double acc = 0.0;
    B[m * (N + 1)] = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      acc += paths.increment(m, i, 0);
      B[m * (N + 1) + i + 1] = acc;
    }
  }

  SolveResult res;
  res.path_count = M;
  res.n_steps = N;
  res.Y.resize(M * (N + 1));
  res.Z.resize(M * N);
  res.diagnostics.regression_rms.assign(N, 0.0);
  res.diagnostics.regression_max.assign(N, 0.0);
  res.diagnostics.picard_counts.assign(N, 0);

  for (std::size_t m = 0; m < M; ++m) {
    const double bT = B[m * (N + 1) + N];
    double v = xi(std::span<const double>(&bT, 1));
    if (cfg.terminal_truncation)
      v = truncate_terminal(v, *cfg.terminal_truncation, cfg.truncation_mode);
    res.Y[m * (N + 1) + N] = v;
  }

  const bool hinted = static_cast<bool>(g.eval_hinted);
  std::vector<double> x(M), cond_exp(M), zfit(M), hint(3 * M, 0.0);
  std::vector<double> drift(M, 0.0);  // per-path accumulated dt * g
  Basis basis;
  basis.spec = cfg.basis;

  for (std::size_t ii = N; ii-- > 0;) {
    const double dt = nodes[ii + 1] - nodes[ii];
    const double t_mid = 0.5 * (nodes[ii] + nodes[ii + 1]);

    for (std::size_t m = 0; m < M; ++m) x[m] = B[m * (N + 1) + ii];
    basis.fit(x, ii == 0);
    const int K = basis.K;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(K, K);
    Eigen::VectorXd rhs_y = Eigen::VectorXd::Zero(K);
    Eigen::VectorXd rhs_z = Eigen::VectorXd::Zero(K);
    std::vector<double> phi(static_cast<std::size_t>(K));
    for (std::size_t m = 0; m < M; ++m) {
      basis.row(x[m], phi.data());
      const double ynext = res.Y[m * (N + 1) + ii + 1];
      const double dB = paths.increment(m, ii, 0);
      for (int a = 0; a < K; ++a) {
        for (int c = a; c < K; ++c) A(a, c) += phi[a] * phi[c];
        rhs_y[a] += phi[a] * ynext;
        rhs_z[a] += phi[a] * ynext * dB;
      }
    }
    A = A.selfadjointView<Eigen::Upper>();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const double lam_min = es.eigenvalues().minCoeff();
    const double lam_max = es.eigenvalues().maxCoeff();
    if (!(lam_min > 0.0) || lam_max / lam_min > kConditionLimit)
      throw basis_error(
          "solve: regression normal equations ill-conditioned at step " +
          std::to_string(ii) + "; lower the degree or use the local basis");

    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    Eigen::VectorXd coef_y = ldlt.solve(rhs_y);
    Eigen::VectorXd coef_z = ldlt.solve(rhs_z);

    double ss = 0.0, mx = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      basis.row(x[m], phi.data());
      double cy = 0.0, cz = 0.0;
      for (int a = 0; a < K; ++a) {
        cy += phi[a] * coef_y[a];
        cz += phi[a] * coef_z[a];
      }
      cond_exp[m] = cy;
      zfit[m] = cz / dt;
      const double r = res.Y[m * (N + 1) + ii + 1] - cy;
      ss += r * r;
      mx = std::fmax(mx, std::fabs(r));
    }
    res.diagnostics.regression_rms[ii] = std::sqrt(ss / static_cast<double>(M));
    res.diagnostics.regression_max[ii] = mx;

    // the y fixed point cannot be resolved below the generator's own
    // evaluation noise floor (envelope optimizers return values only up to
    // their tolerance)
    const double picard_tol =
        std::fmax(cfg.picard_tol, 2.0 * dt * g.eval_noise);
    int worst_iters = 0;
    for (std::size_t m = 0; m < M; ++m) {
      const double bi = B[m * (N + 1) + ii];
      const double zi = zfit[m];
      const std::span<const double> b_span(&bi, 1);
      const std::span<const double> z_span(&zi, 1);
      double* arg = &hint[3 * m];
      double yv = cond_exp[m];
      if (g.implicit_step) {
        yv = g.implicit_step(t_mid, b_span, z_span, cond_exp[m], dt);
        worst_iters = std::max(worst_iters, 1);
        drift[m] += yv - cond_exp[m];
        res.Y[m * (N + 1) + ii] = yv;
        res.Z[m * N + ii] = zi;
        continue;
      }
      bool converged = false;
      int iters = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (; iters < cfg.picard_iters; ++iters) {
        const double gv = hinted
                              ? g.eval_hinted(t_mid, b_span, yv, z_span, arg,
                                              iters > 0)
                              : g(t_mid, b_span, yv, z_span);
        const double ynew = cond_exp[m] + dt * gv;
        delta = std::fabs(ynew - yv);
        yv = ynew;
        if (delta <= picard_tol) {
          converged = true;
          break;
        }
      }
      // a noisy evaluator (warm-started envelope on a multimodal
      // landscape) can stall above the strict tolerance; accept the fixed
      // point when the residual is still at the noise scale
      if (!converged && delta <= 50.0 * dt * g.eval_noise) converged = true;
      if (!converged)
        throw step_failure("solve: Picard iteration failed to converge at step " +
                               std::to_string(ii),
                           ii);
      worst_iters = std::max(worst_iters, iters + 1);
      drift[m] += yv - cond_exp[m];
      res.Y[m * (N + 1) + ii] = yv;
      res.Z[m * N + ii] = zi;
    }
    res.diagnostics.picard_counts[ii] = worst_iters;
  }

  res.y0 = res.Y[0];

  // Monte Carlo error of y0. The regressions preserve sample means, so y0
  // equals the mean of the pathwise functional xi + sum_i dt*g; its spread
  // is the honest dispersion of the estimate.
  double mean_a = 0.0;
  std::vector<double> a_path(M);
  for (std::size_t m = 0; m < M; ++m) {
    a_path[m] = res.Y[m * (N + 1) + N] + drift[m];
    mean_a += a_path[m];
  }
  mean_a /= static_cast<double>(M);
  double var_a = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const double d = a_path[m] - mean_a;
    var_a += d * d;
  }
  var_a /= static_cast<double>(M > 1 ? M - 1 : 1);
  res.diagnostics.y0_stderr = std::sqrt(var_a / static_cast<double>(M));

  res.diagnostics.eps_reg = 0.0;
  for (double r : res.diagnostics.regression_rms)
    res.diagnostics.eps_reg = std::fmax(res.diagnostics.eps_reg, r);

  const Diagnostics norms = diagnostics_report(res, paths.grid);
  res.diagnostics.s_beta = norms.s_beta;
  res.diagnostics.s_beta_stderr = norms.s_beta_stderr;
  res.diagnostics.m_beta = norms.m_beta;
  res.diagnostics.m_beta_stderr = norms.m_beta_stderr;
  return res;
}

std::vector<SolveResult> solve_truncated_family(
    const TerminalCondition& xi, const GeneratorSpec& g,
    const PathBundle& paths, const SolverConfig& cfg,
    const std::vector<double>& levels, TruncationMode mode) {
  for (std::size_t k = 1; k < levels.size(); ++k)
    if (levels[k] <= levels[k - 1])
      throw std::invalid_argument("solve_truncated_family: levels must increase");
  std::vector<SolveResult> out;
  out.reserve(levels.size());
  for (double L : levels) {
    SolverConfig c = cfg;
    if (std::isfinite(L)) {
      c.terminal_truncation = L;
      c.truncation_mode = mode;
    } else {
      c.terminal_truncation.reset();
    }
    out.push_back(solve(xi, g, paths, c));
  }
  return out;
}

Diagnostics diagnostics_report(const SolveResult& result, const TimeGrid& grid,
                               const std::vector<double>& betas) {
  Diagnostics d;
  const std::size_t M = result.path_count;
  const std::size_t N = result.n_steps;
  std::vector<double> sup_abs(M, 0.0), z_quad(M, 0.0);
  for (std::size_t m = 0; m < M; ++m) {
    double s = 0.0;
    for (std::size_t i = 0; i <= N; ++i)
      s = std::fmax(s, std::fabs(result.y(m, i)));
    sup_abs[m] = s;
    double q = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double zi = result.z(m, i);
      q += zi * zi * grid.dt(i);
    }
    z_quad[m] = q;
  }
  for (double beta : betas) {
    if (!(beta > 0.0 && beta < 1.0))
      throw std::invalid_argument("diagnostics_report: beta must lie in (0,1)");
    double ms = 0.0, mz = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      ms += std::pow(sup_abs[m], beta);
      mz += std::pow(z_quad[m], beta / 2.0);
    }
    ms /= static_cast<double>(M);
    mz /= static_cast<double>(M);
    double vs = 0.0, vz = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      const double ds = std::pow(sup_abs[m], beta) - ms;
      const double dz = std::pow(z_quad[m], beta / 2.0) - mz;
      vs += ds * ds;
      vz += dz * dz;
    }
    const double denom = static_cast<double>(M > 1 ? M - 1 : 1) * static_cast<double>(M);
    // beta < 1, so the S^beta / M^beta functionals carry exponent 1 outside
    d.s_beta[beta] = ms;
    d.s_beta_stderr[beta] = std::sqrt(vs / denom);
    d.m_beta[beta] = mz;
    d.m_beta_stderr[beta] = std::sqrt(vz / denom);
  }
  return d;
}

}  // namespace bsde
