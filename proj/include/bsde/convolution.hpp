#ifndef BSDE_CONVOLUTION_HPP
#define BSDE_CONVOLUTION_HPP

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsde/generators.hpp"

namespace bsde {

struct evaluation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EnvelopeKind { InfZ, SupZ, InfYZ, SupYZ };

std::string to_string(EnvelopeKind k);
EnvelopeKind envelope_kind_from_string(const std::string& s);

struct EvalPoint {
  double t = 0.0;
  std::vector<double> b;
  double y = 0.0;
  std::vector<double> z;
};

struct EnvelopeQuery {
  GeneratorSpec g;
  int n = 1;
  EvalPoint point;
  EnvelopeKind kind = EnvelopeKind::InfZ;
  double tol = 1e-6;
};

struct EnvelopeResult {
  double value = 0.0;
  double arg_y = 0.0;  // equals the query y for the z-only kinds
  std::vector<double> arg_z;
  double search_radius = 0.0;    // z-search radius
  double search_radius_y = 0.0;  // joint kinds only
  double certified_gap = 0.0;
};

/// Coercivity radius in z: any near-minimizer of the penalized objective
/// lies within this distance of the query z, so the infimum over R^d
/// equals the infimum over the ball. Requires the (H4) flag.
double search_radius_z(const GeneratorSpec& g, int n, double t,
                       std::span<const double> b, double y,
                       std::span<const double> z, double tol = 1e-6);

/// The analogous radius in y for the joint kinds. Requires (H5).
double search_radius_y(const GeneratorSpec& g, int n, double t,
                       std::span<const double> b, double y,
                       std::span<const double> z, double tol = 1e-6);

EnvelopeResult envelope(const EnvelopeQuery& query);

/// Low-level entry used by the solver: stack-only, no allocation.
/// arg_inout holds (u_y, v_0, v_1); with use_hint the search restarts in a
/// small window around the previous optimizer instead of the full ball.
double envelope_value(const GeneratorSpec& g, int n, EnvelopeKind kind,
                      double t, std::span<const double> b, double y,
                      std::span<const double> z, double tol,
                      double* arg_inout, bool use_hint);

/// Wraps g_n (or g^n) as a generator usable by the solver, with the flags
/// and constants the approximants inherit.
GeneratorSpec make_envelope_generator(const GeneratorSpec& g, int n,
                                      EnvelopeKind kind, double tol = 1e-4);

struct OrderingViolation {
  std::size_t point_index = 0;
  std::size_t n_index = 0;
  double excess = 0.0;
};

struct SequenceTable {
  std::vector<int> n_list;
  std::vector<EvalPoint> points;
  std::vector<std::vector<double>> values;  // [point][n]
  std::vector<double> direct;               // g at each point
  double tol = 0.0;
  bool ordering_ok = true;  // monotone in n within 2*tol
  std::vector<OrderingViolation> violations;
};

SequenceTable envelope_sequence(const GeneratorSpec& g,
                                const std::vector<int>& n_list,
                                const std::vector<EvalPoint>& points,
                                EnvelopeKind kind, double tol = 1e-6);

struct ModulusReport {
  std::size_t pair_count = 0;
  std::size_t violation_count = 0;
  double worst_slack = 0.0;  // max over pairs of lhs - modulus bound
  EvalPoint worst_a, worst_b;
  bool pass = true;
};

/// Checks the inherited modulus of continuity on sample pairs:
/// (n+lambda)|z1-z2|^alpha for the z-only kinds, nC(|y1-y2|+|z1-z2|^alpha)
/// for the joint kinds, within 2*tol slack.
ModulusReport holder_modulus_check(
    const GeneratorSpec& g, int n, EnvelopeKind kind,
    const std::vector<std::pair<EvalPoint, EvalPoint>>& sample_pairs,
    double tol = 1e-6);

}  // namespace bsde

#endif
