#include "bsde/generators.hpp"

#include <stdexcept>

#include "bsde/expr.hpp"

namespace bsde {

std::string to_string(Assumption a) {
  switch (a) {
    case Assumption::H1: return "H1";
    case Assumption::H1prime: return "H1'";
    case Assumption::H1a: return "H1a";
    case Assumption::H1b: return "H1b";
    case Assumption::H2: return "H2";
    case Assumption::H2prime: return "H2'";
    case Assumption::H3: return "H3";
    case Assumption::H4: return "H4";
    case Assumption::H4prime: return "H4'";
    case Assumption::H4dprime: return "H4''";
    case Assumption::H4star: return "H4*";
    case Assumption::H5: return "H5";
  }
  return "?";
}

GeneratorSpec example1(int d) {
  GeneratorSpec g;
  g.label = "example1";
  g.d = d;
  g.eval = [](double t, std::span<const double> b, double y,
              std::span<const double> z) {
    const double nb = euclid_norm(b);
    const double nz = euclid_norm(z);
    const double singular = t > 0.0 ? 1.0 / std::sqrt(t) : 0.0;
    return -nb * std::exp(y) + (std::fabs(y) + std::sqrt(nz)) * std::sin(nz) +
           singular + nb * nb;
  };
  g.params.mu = 1.0;
  g.params.lambda = 1.0;
  g.params.alpha = 0.5;
  g.params.rho_modulus = [](double u) { return u; };
  g.params.flags = {Assumption::H1, Assumption::H2, Assumption::H3,
                    Assumption::H4};
  return g;
}

GeneratorSpec example2(int d) {
  GeneratorSpec g;
  g.label = "example2";
  g.d = d;
  g.eval = [](double t, std::span<const double> b, double y,
              std::span<const double> z) {
    (void)t;
    const double nz = euclid_norm(z);
    const double head = y <= 0.0 ? std::sin(y) : std::cos(y);
    return head + (std::fabs(y) + std::log1p(nz)) * std::sin(y * y * nz * nz * nz) +
           b[0];
  };
  g.params.C = 1.0;
  g.params.alpha = 0.5;
  // ln(1+|z|) <= sqrt(|z|), so the b1 term and the indicator head are the
  // only pieces f has to absorb.
  g.params.f_process = [](double, std::span<const double> b) {
    return 1.0 + std::fabs(b[0]);
  };
  g.params.flags = {Assumption::H1a, Assumption::H5};
  return g;
}

GeneratorSpec example3(double T, int d) {
  GeneratorSpec g;
  g.label = "example3";
  g.d = d;
  const double half = T / 2.0;
  g.eval = [half](double t, std::span<const double> b, double y,
                  std::span<const double> z) {
    const double nb = euclid_norm(b);
    const double nz = euclid_norm(z);
    const double singular = t != half ? 1.0 / std::sqrt(std::fabs(t - half)) : 0.0;
    return nb * nb * std::exp(-y) + std::sqrt(1.0 + std::fabs(y) + nz) +
           std::cbrt(nz) + singular;
  };
  g.params.mu = 1.0;
  g.params.lambda = 2.0;
  g.params.alpha = 0.5;
  g.params.f_process = [](double, std::span<const double>) { return 1.0; };
  g.params.rho_modulus = [](double u) { return u; };
  // sqrt(1+|y|+|z|) moves by at most sqrt(u) and cbrt(|z|) by cbrt(u)
  // under a z-shift of size u
  g.params.phi_modulus = [](double u) { return std::sqrt(u) + std::cbrt(u); };
  // (H4') holds with (lambda, alpha, f) = (2, 1/2, 1); the same constants
  // also satisfy the plain (H4) inequality, so both flags are declared.
  g.params.flags = {Assumption::H1,      Assumption::H2,     Assumption::H2prime,
                    Assumption::H3,      Assumption::H4,     Assumption::H4prime,
                    Assumption::H4star};
  return g;
}

double truncate_y(double y, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("truncate_y: k must be positive");
  // branch instead of y*k/max(|y|,k): the algebraic form is not exactly
  // idempotent in floating point, the clamp is
  return std::fabs(y) <= k ? y : (y > 0.0 ? k : -k);
}

std::pair<double, double> remark1_bound(const GeneratorSpec& g, double t,
                                        std::span<const double> b, double y,
                                        std::span<const double> z) {
  if (!g.has(Assumption::H2) || !g.has(Assumption::H4))
    throw std::logic_error("remark1_bound: generator must claim (H2) and (H4)");
  const double lhs = g(t, b, y, z) * sgn(y);
  std::vector<double> zero(z.size(), 0.0);
  const double g00 = g(t, b, 0.0, zero);
  const double rhs = std::fabs(g00) + g.params.lambda * g.params.f(t, b) +
                     (g.params.lambda + g.params.mu) * std::fabs(y) +
                     g.params.lambda * euclid_norm(z);
  return {lhs, rhs};
}

GeneratorSpec generator_by_label(const std::string& label, double T, int d) {
  if (label == "example1") return example1(d);
  if (label == "example2") return example2(d);
  if (label == "example3") return example3(T, d);
  if (label.rfind("expr:", 0) == 0) {
    GeneratorSpec g;
    g.label = label;
    g.d = d;
    g.eval = expr::parse(label.substr(5), d);
    // expression generators claim the default assumption package; the
    // checkers exist to put such claims on trial
    g.params.mu = 1.0;
    g.params.lambda = 1.0;
    g.params.alpha = 0.5;
    g.params.C = 1.0;
    g.params.f_process = [](double, std::span<const double>) { return 1.0; };
    g.params.rho_modulus = [](double u) { return u; };
    g.params.flags = {Assumption::H1, Assumption::H1prime, Assumption::H2,
                      Assumption::H2prime, Assumption::H3, Assumption::H4,
                      Assumption::H5};
    return g;
  }
  throw std::invalid_argument("unknown generator label: " + label);
}

TerminalCondition terminal_by_label(const std::string& label) {
  TerminalCondition xi;
  xi.label = label;
  if (label == "zero") {
    xi.eval = [](std::span<const double>) { return 0.0; };
    xi.integrability_note = "bounded";
  } else if (label == "BT") {
    xi.eval = [](std::span<const double> b) { return b[0]; };
    xi.integrability_note = "Gaussian, in every L^p";
  } else if (label == "BT2") {
    xi.eval = [](std::span<const double> b) { return b[0] * b[0]; };
    xi.integrability_note = "chi-square, in every L^p";
  } else if (label == "absBT") {
    xi.eval = [](std::span<const double> b) { return std::fabs(b[0]); };
    xi.integrability_note = "half-normal, in every L^p";
  } else if (label == "negAbsBT") {
    xi.eval = [](std::span<const double> b) { return -std::fabs(b[0]); };
    xi.integrability_note = "half-normal, in every L^p";
  } else if (label == "expBT2q") {
    xi.eval = [](std::span<const double> b) { return std::exp(b[0] * b[0] / 4.0); };
    xi.integrability_note = "integrable for T < 2, heavy-tailed (no L^2 for T >= 1)";
  } else if (label.rfind("expr:", 0) == 0) {
    // terminal expressions see B_T through the b variables (b1, b2, normb)
    auto fn = expr::parse(label.substr(5), 2);
    xi.eval = [fn](std::span<const double> b) {
      double padded[2] = {b[0], b.size() > 1 ? b[1] : 0.0};
      return fn(0.0, padded, 0.0, padded);
    };
    xi.integrability_note = "user-supplied";
  } else {
    throw std::invalid_argument("unknown terminal label: " + label);
  }
  return xi;
}

}  // namespace bsde
