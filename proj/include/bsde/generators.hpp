#ifndef BSDE_GENERATORS_HPP
#define BSDE_GENERATORS_HPP

#include <cmath>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <utility>

namespace bsde {

enum class Assumption {
  H1,        // jointly continuous, y-continuity uniform in z
  H1prime,   // jointly continuous
  H1a,       // left-continuous / lower semi-continuous in y, continuous in z
  H1b,       // right-continuous / upper semi-continuous in y, continuous in z
  H2,        // monotonic in y with constant mu
  H2prime,   // weakly monotonic in y with modulus rho
  H3,        // integrable growth in y at z = 0
  H4,        // sublinear growth in z: lambda*(f + |y| + |z|^alpha)
  H4prime,   // stronger sublinear growth: lambda*(f + |y| + |z|)^alpha
  H4dprime,  // Holder continuous in z with constant gamma
  H4star,    // uniformly continuous in z with modulus phi
  H5         // linear growth: f + C*(|y| + |z|^alpha)
};

std::string to_string(Assumption a);

/// Declared constants and moduli for the assumption classes a generator
/// claims. Only the fields relevant to the claimed flags are meaningful.
struct AssumptionParams {
  double mu = 0.0;
  double lambda = 1.0;
  double alpha = 0.5;
  double C = 1.0;
  double gamma = 1.0;
  std::function<double(double, std::span<const double>)> f_process;  // >= 0
  std::function<double(double)> rho_modulus;  // concave, rho(0)=0
  std::function<double(double)> phi_modulus;  // nondecreasing, phi(0)=0
  std::set<Assumption> flags;

  double f(double t, std::span<const double> b) const {
    return f_process ? f_process(t, b) : 0.0;
  }
  bool has(Assumption a) const { return flags.count(a) != 0; }
};

/// A generator g(t, b, y, z) evaluated through the Markovian state b = B_t.
struct GeneratorSpec {
  std::function<double(double t, std::span<const double> b, double y,
                       std::span<const double> z)>
      eval;
  /// Optional warm-startable evaluation for envelope-backed generators.
  /// arg_inout carries the previous optimizer; with use_hint the search
  /// restarts locally around it.
  std::function<double(double t, std::span<const double> b, double y,
                       std::span<const double> z, double* arg_inout,
                       bool use_hint)>
      eval_hinted;
  AssumptionParams params;
  std::string label;
  int d = 1;
  /// Evaluation noise floor: envelope-backed generators cannot return
  /// values sharper than their optimizer tolerance, so fixed-point loops
  /// must not demand convergence below it.
  double eval_noise = 0.0;
  /// Optional direct solver for the implicit Euler step
  /// y = c + dt * g(t, b, y, z). Generators whose y-dependence has an
  /// exploitable structure (the joint envelopes are piecewise linear in y
  /// around their optimizer) provide this; plain Picard is used otherwise.
  std::function<double(double t, std::span<const double> b,
                       std::span<const double> z, double c, double dt)>
      implicit_step;

  bool has(Assumption a) const { return params.has(a); }
  double operator()(double t, std::span<const double> b, double y,
                    std::span<const double> z) const {
    return eval(t, b, y, z);
  }
};

struct TerminalCondition {
  std::function<double(std::span<const double>)> eval;  // of B_T
  std::string label;
  std::string integrability_note;

  double operator()(std::span<const double> bT) const { return eval(bT); }
};

inline double euclid_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

GeneratorSpec example1(int d = 1);
GeneratorSpec example2(int d = 1);
GeneratorSpec example3(double T = 1.0, int d = 1);

/// y * k / max(|y|, k): identity inside [-k, k], clamped to +-k outside.
double truncate_y(double y, double k);

/// Left: g(t,b,y,z)*sgn(y). Right: |g(t,b,0,0)| + lambda*f_t
/// + (lambda+mu)*|y| + lambda*|z|. Requires flags H2 and H4.
std::pair<double, double> remark1_bound(const GeneratorSpec& g, double t,
                                        std::span<const double> b, double y,
                                        std::span<const double> z);

/// Lookup by CLI label ("example1", "example2", "example3", or
/// "expr:<formula>"); throws std::invalid_argument for unknown labels.
GeneratorSpec generator_by_label(const std::string& label, double T = 1.0,
                                 int d = 1);
TerminalCondition terminal_by_label(const std::string& label);

}  // namespace bsde

#endif
