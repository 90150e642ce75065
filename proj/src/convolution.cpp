#include "bsde/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace bsde {

std::string to_string(EnvelopeKind k) {
  switch (k) {
    case EnvelopeKind::InfZ: return "inf_z";
    case EnvelopeKind::SupZ: return "sup_z";
    case EnvelopeKind::InfYZ: return "inf_yz";
    case EnvelopeKind::SupYZ: return "sup_yz";
  }
  return "?";
}

EnvelopeKind envelope_kind_from_string(const std::string& s) {
  if (s == "inf_z") return EnvelopeKind::InfZ;
  if (s == "sup_z") return EnvelopeKind::SupZ;
  if (s == "inf_yz") return EnvelopeKind::InfYZ;
  if (s == "sup_yz") return EnvelopeKind::SupYZ;
  throw std::invalid_argument("unknown envelope kind: " + s);
}

namespace {

constexpr int kMaxLevels = 100;

bool is_joint(EnvelopeKind k) {
  return k == EnvelopeKind::InfYZ || k == EnvelopeKind::SupYZ;
}
bool is_sup(EnvelopeKind k) {
  return k == EnvelopeKind::SupZ || k == EnvelopeKind::SupYZ;
}

// Penalized objective minimized over the search cell. Layout of u: the
// y-coordinate first for joint kinds, then the z coordinates.
struct Objective {
  const GeneratorSpec* g;
  double t;
  std::span<const double> b;
  double y;
  const double* z;
  std::size_t dz;
  bool joint;
  double sign;     // +1 for inf kinds, -1 for sup kinds
  double coeff;    // n+lambda (z kinds) or nC (joint kinds)
  double alpha;

  double operator()(const double* u) const {
    const double* v = joint ? u + 1 : u;
    const double uy = joint ? u[0] : y;
    double dist2 = 0.0;
    for (std::size_t c = 0; c < dz; ++c) {
      const double dvc = v[c] - z[c];
      dist2 += dvc * dvc;
    }
    double pen = coeff * std::pow(std::sqrt(dist2), alpha);
    if (joint) pen += coeff * std::fabs(uy - y);
    return sign * (*g)(t, b, uy, std::span<const double>(v, dz)) + pen;
  }
};

struct SearchState {
  double best_value;
  double best_arg[3];
};

void check_finite(double value, const double* u, int dims) {
  if (std::isfinite(value)) return;
  std::string msg = "envelope: generator evaluated non-finite at (";
  for (int j = 0; j < dims; ++j)
    msg += (j ? "," : "") + std::to_string(u[j]);
  msg += ")";
  throw evaluation_error(msg);
}

void scan_grid(const Objective& obj, int dims, const double* center,
               const double* halfw, const int* points, SearchState& st) {
  int total = 1;
  for (int j = 0; j < dims; ++j) total *= points[j];
  double u[3] = {0, 0, 0};
  for (int idx = 0; idx < total; ++idx) {
    int rem = idx;
    for (int j = 0; j < dims; ++j) {
      const int pj = points[j];
      const int ij = rem % pj;
      rem /= pj;
      u[j] = pj == 1 ? center[j]
                     : center[j] - halfw[j] +
                           2.0 * halfw[j] * static_cast<double>(ij) /
                               static_cast<double>(pj - 1);
    }
    const double val = obj(u);
    check_finite(val, u, dims);
    if (val < st.best_value) {
      st.best_value = val;
      for (int j = 0; j < dims; ++j) st.best_arg[j] = u[j];
    }
  }
}

// Coarse scan over the certified box, then shrinking windows around the
// incumbent until every cell is below its pitch target. The reported gap
// covers the penalty's modulus over the final cell (the documented
// certificate); the coarse resolution guards against missing basins of g.
double multilevel_search(const Objective& obj, int dims, const double* center0,
                         const double* radius, const double* max_radius,
                         const double* target, bool use_hint, double* arg_out,
                         double* gap_out) {
  double center[3], halfw[3];
  for (int j = 0; j < dims; ++j) {
    center[j] = center0[j];
    halfw[j] = std::max(radius[j], target[j]);
  }

  SearchState st;
  st.best_value = std::numeric_limits<double>::infinity();

  // the penalty-free point is always a candidate; it pins envelope <= g
  // exactly and makes z-independent generators fixed points
  {
    double u0[3];
    for (int j = 0; j < dims; ++j) u0[j] = center0[j];
    const double v0 = obj(u0);
    check_finite(v0, u0, dims);
    st.best_value = v0;
    for (int j = 0; j < dims; ++j) st.best_arg[j] = u0[j];
  }

  const int coarse_cap = dims == 1 ? 257 : (dims == 2 ? 65 : 21);
  const int refine_pts = dims == 1 ? 9 : (dims == 2 ? 7 : 5);

  int points[3];
  for (int j = 0; j < dims; ++j) {
    if (use_hint) {
      points[j] = refine_pts;
    } else {
      const double wanted = std::ceil(2.0 * halfw[j] / 1.0) + 1.0;
      points[j] = static_cast<int>(std::clamp(wanted, static_cast<double>(refine_pts),
                                              static_cast<double>(coarse_cap)));
    }
  }

  double cell[3];
  for (int level = 0; level < kMaxLevels; ++level) {
    scan_grid(obj, dims, center, halfw, points, st);
    for (int j = 0; j < dims; ++j)
      cell[j] = points[j] > 1 ? 2.0 * halfw[j] / static_cast<double>(points[j] - 1)
                              : 0.0;
    // a warm-started window may not contain the optimum: if the incumbent
    // sits on the window edge and the window is below the certified
    // radius, grow instead of shrinking
    bool grow = false;
    if (use_hint) {
      for (int j = 0; j < dims; ++j)
        if (halfw[j] < max_radius[j] &&
            std::fabs(st.best_arg[j] - center[j]) >= halfw[j] * (1.0 - 1e-9))
          grow = true;
    }
    if (grow) {
      for (int j = 0; j < dims; ++j) {
        center[j] = st.best_arg[j];
        halfw[j] = std::min(halfw[j] * 2.0, max_radius[j]);
        points[j] = refine_pts;
      }
      continue;
    }
    bool done = true;
    for (int j = 0; j < dims; ++j)
      if (cell[j] > target[j]) done = false;
    if (done) break;
    for (int j = 0; j < dims; ++j) {
      center[j] = st.best_arg[j];
      halfw[j] = std::min(halfw[j] * 0.5, std::max(1.25 * cell[j], target[j]));
      points[j] = refine_pts;
    }
  }

  double gap = 0.0;
  {
    // penalty modulus over one final cell
    double diag2 = 0.0;
    const int zoff = obj.joint ? 1 : 0;
    for (int j = zoff; j < dims; ++j) diag2 += cell[j] * cell[j];
    gap = obj.coeff * std::pow(std::sqrt(diag2), obj.alpha);
    if (obj.joint) gap += obj.coeff * cell[0];
  }
  *gap_out = gap;
  for (int j = 0; j < dims; ++j) arg_out[j] = st.best_arg[j];
  return st.best_value;
}

double growth_budget_z(const GeneratorSpec& g, double t,
                       std::span<const double> b, double y,
                       std::span<const double> z) {
  const auto& p = g.params;
  return 2.0 * p.lambda *
         (p.f(t, b) + std::fabs(y) + std::pow(euclid_norm(z), p.alpha));
}

double growth_budget_yz(const GeneratorSpec& g, double t,
                        std::span<const double> b, double y,
                        std::span<const double> z) {
  const auto& p = g.params;
  return 2.0 * (p.f(t, b) + p.C * std::fabs(y) +
                p.C * std::pow(euclid_norm(z), p.alpha));
}

// (n-1) degenerates at n = 1, where the penalty only just matches the
// growth bound; clamp the coercivity margin at 1/2 there.
double joint_margin(int n) { return std::max(static_cast<double>(n) - 1.0, 0.5); }

}  // namespace

double search_radius_z(const GeneratorSpec& g, int n, double t,
                       std::span<const double> b, double y,
                       std::span<const double> z, double tol) {
  if (!g.has(Assumption::H4))
    throw std::logic_error("search_radius_z: generator must claim (H4)");
  const double budget = growth_budget_z(g, t, b, y, z);
  return std::pow(budget / static_cast<double>(n), 1.0 / g.params.alpha) + tol;
}

double search_radius_y(const GeneratorSpec& g, int n, double t,
                       std::span<const double> b, double y,
                       std::span<const double> z, double tol) {
  if (!g.has(Assumption::H5))
    throw std::logic_error("search_radius_y: generator must claim (H5)");
  const double budget = growth_budget_yz(g, t, b, y, z);
  return budget / (joint_margin(n) * g.params.C) + tol;
}

double envelope_value(const GeneratorSpec& g, int n, EnvelopeKind kind,
                      double t, std::span<const double> b, double y,
                      std::span<const double> z, double tol,
                      double* arg_inout, bool use_hint) {
  const std::size_t dz = z.size();
  if (dz > 2)
    throw std::invalid_argument("envelope: z-dimension above 2 is unsupported");
  const bool joint = is_joint(kind);
  if (joint) {
    if (!g.has(Assumption::H5))
      throw std::logic_error("envelope: joint kinds require the (H5) flag");
  } else if (!g.has(Assumption::H4)) {
    throw std::logic_error("envelope: z kinds require the (H4) flag");
  }

  Objective obj;
  obj.g = &g;
  obj.t = t;
  obj.b = b;
  obj.y = y;
  obj.z = z.data();
  obj.dz = dz;
  obj.joint = joint;
  obj.sign = is_sup(kind) ? -1.0 : 1.0;
  obj.alpha = g.params.alpha;
  obj.coeff = joint ? static_cast<double>(n) * g.params.C
                    : static_cast<double>(n) + g.params.lambda;

  const int dims = static_cast<int>(dz) + (joint ? 1 : 0);
  double center[3], radius[3], target[3];
  const double pitch_z =
      std::pow(tol / (2.0 * obj.coeff), 1.0 / obj.alpha) /
      std::sqrt(static_cast<double>(dz));
  if (joint) {
    const double budget = growth_budget_yz(g, t, b, y, z);
    const double margin = joint_margin(n) * g.params.C;
    center[0] = y;
    radius[0] = budget / margin + tol;
    target[0] = tol / (2.0 * obj.coeff);
    for (std::size_t c = 0; c < dz; ++c) {
      center[1 + c] = z[c];
      radius[1 + c] = std::pow(budget / margin, 1.0 / obj.alpha) + tol;
      target[1 + c] = pitch_z;
    }
  } else {
    const double R = search_radius_z(g, n, t, b, y, z, tol);
    for (std::size_t c = 0; c < dz; ++c) {
      center[c] = z[c];
      radius[c] = R;
      target[c] = pitch_z;
    }
  }

  double max_radius[3];
  for (int j = 0; j < dims; ++j) max_radius[j] = radius[j];
  if (use_hint) {
    for (int j = 0; j < dims; ++j) {
      center[j] = arg_inout[j];
      radius[j] = std::min(radius[j], std::max(0.05 * radius[j], 16.0 * target[j]));
    }
  }

  double gap = 0.0;
  const double raw = multilevel_search(obj, dims, center, radius, max_radius,
                                       target, use_hint, arg_inout, &gap);
  return obj.sign * raw;
}

EnvelopeResult envelope(const EnvelopeQuery& q) {
  const auto& p = q.point;
  EnvelopeResult r;
  double arg[3] = {0, 0, 0};
  const bool joint = is_joint(q.kind);
  r.value = envelope_value(q.g, q.n, q.kind, p.t, p.b, p.y, p.z, q.tol, arg,
                           false);
  r.arg_y = joint ? arg[0] : p.y;
  const int zoff = joint ? 1 : 0;
  r.arg_z.assign(arg + zoff, arg + zoff + p.z.size());
  if (joint) {
    r.search_radius_y = search_radius_y(q.g, q.n, p.t, p.b, p.y, p.z, q.tol);
    const double budget = growth_budget_yz(q.g, p.t, p.b, p.y, p.z);
    r.search_radius =
        std::pow(budget / (joint_margin(q.n) * q.g.params.C),
                 1.0 / q.g.params.alpha) +
        q.tol;
  } else {
    r.search_radius = search_radius_z(q.g, q.n, p.t, p.b, p.y, p.z, q.tol);
  }
  {
    // pitch targets are chosen so the final-cell penalty modulus is <= tol/2
    const double coeff = joint
                             ? static_cast<double>(q.n) * q.g.params.C
                             : static_cast<double>(q.n) + q.g.params.lambda;
    const double pitch_z = std::pow(q.tol / (2.0 * coeff), 1.0 / q.g.params.alpha);
    double gap = coeff * std::pow(pitch_z, q.g.params.alpha);
    if (joint) gap += coeff * (q.tol / (2.0 * coeff));
    r.certified_gap = gap;
  }
  return r;
}

GeneratorSpec make_envelope_generator(const GeneratorSpec& g, int n,
                                      EnvelopeKind kind, double tol) {
  GeneratorSpec out;
  out.label = g.label + "/" + to_string(kind) + "(n=" + std::to_string(n) + ")";
  out.d = g.d;
  out.params = g.params;
  const bool joint = is_joint(kind);
  if (joint) {
    // nC-Lipschitz in y, alpha-Holder in z with constant nC; still bounded
    // by f + C(|y| + |z|^alpha)
    out.params.mu = static_cast<double>(n) * g.params.C;
    out.params.gamma = static_cast<double>(n) * g.params.C;
    out.params.flags = {Assumption::H1prime, Assumption::H2, Assumption::H3,
                        Assumption::H4dprime, Assumption::H5};
  } else {
    // same mu, same (H4) constants, plus the inherited Holder certificate
    out.params.gamma = static_cast<double>(n) + g.params.lambda;
    out.params.flags = {Assumption::H1prime, Assumption::H2, Assumption::H3,
                        Assumption::H4, Assumption::H4dprime};
  }
  out.eval_noise = tol;
  GeneratorSpec base = g;
  if (joint) {
    // implicit Euler step: around the frozen optimizer (u*, v*) the
    // envelope is exactly c0 + sign * nC * |y - u*|, so the fixed point
    // has a closed form; re-searching at the new y tightens the frozen
    // argument until the iterates settle
    const double coeff = static_cast<double>(n) * g.params.C;
    const double sign = (kind == EnvelopeKind::SupYZ) ? -1.0 : 1.0;
    const double alpha = g.params.alpha;
    out.implicit_step = [base, n, kind, tol, coeff, sign, alpha](
                            double t, std::span<const double> b,
                            std::span<const double> z, double c, double dt) {
      double y = c;
      double arg[3] = {0, 0, 0};
      for (int outer = 0; outer < 6; ++outer) {
        const double value =
            envelope_value(base, n, kind, t, b, y, z, tol, arg, false);
        const double u = arg[0];
        // value = g(u*,v*) + sign*nC*(|y-u*| + dist^alpha); peel off the
        // |y - u*| leg so it can vary with y in the scalar solve
        const double a0 = value - sign * coeff * std::fabs(y - u);
        const double y_hi =
            (c + dt * a0 - sign * dt * coeff * u) / (1.0 - sign * dt * coeff);
        const double y_lo =
            (c + dt * a0 + sign * dt * coeff * u) / (1.0 + sign * dt * coeff);
        double ynew;
        if (y_hi >= u)
          ynew = y_hi;
        else if (y_lo <= u)
          ynew = y_lo;
        else
          ynew = u;
        const double delta = std::fabs(ynew - y);
        y = ynew;
        if (delta <= std::fmax(1e-12, 0.5 * dt * tol)) break;
      }
      return y;
    };
  }
  out.eval = [base, n, kind, tol](double t, std::span<const double> b, double y,
                                  std::span<const double> z) {
    double arg[3] = {0, 0, 0};
    return envelope_value(base, n, kind, t, b, y, z, tol, arg, false);
  };
  out.eval_hinted = [base, n, kind, tol](double t, std::span<const double> b,
                                         double y, std::span<const double> z,
                                         double* arg_inout, bool use_hint) {
    return envelope_value(base, n, kind, t, b, y, z, tol, arg_inout, use_hint);
  };
  return out;
}

SequenceTable envelope_sequence(const GeneratorSpec& g,
                                const std::vector<int>& n_list,
                                const std::vector<EvalPoint>& points,
                                EnvelopeKind kind, double tol) {
  for (std::size_t k = 1; k < n_list.size(); ++k)
    if (n_list[k] <= n_list[k - 1])
      throw std::invalid_argument("envelope_sequence: n_list must be strictly increasing");

  SequenceTable table;
  table.n_list = n_list;
  table.points = points;
  table.tol = tol;
  table.values.resize(points.size());
  table.direct.resize(points.size());
  const bool sup = is_sup(kind);

  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto& pt = points[p];
    table.direct[p] = g(pt.t, pt.b, pt.y, pt.z);
    auto& row = table.values[p];
    row.reserve(n_list.size());
    for (int n : n_list) {
      double arg[3] = {0, 0, 0};
      row.push_back(envelope_value(g, n, kind, pt.t, pt.b, pt.y, pt.z, tol,
                                   arg, false));
    }
    for (std::size_t k = 1; k < row.size(); ++k) {
      // nondecreasing for inf kinds, nonincreasing for sup kinds
      const double excess = sup ? row[k] - row[k - 1] - 2.0 * tol
                                : row[k - 1] - row[k] - 2.0 * tol;
      if (excess > 0.0) {
        table.ordering_ok = false;
        table.violations.push_back({p, k, excess});
      }
    }
  }
  return table;
}

ModulusReport holder_modulus_check(
    const GeneratorSpec& g, int n, EnvelopeKind kind,
    const std::vector<std::pair<EvalPoint, EvalPoint>>& sample_pairs,
    double tol) {
  ModulusReport rep;
  rep.pair_count = sample_pairs.size();
  rep.worst_slack = -std::numeric_limits<double>::infinity();
  const bool joint = is_joint(kind);
  const double coeff = joint ? static_cast<double>(n) * g.params.C
                             : static_cast<double>(n) + g.params.lambda;

  for (const auto& [a, c] : sample_pairs) {
    double arg[3] = {0, 0, 0};
    const double va =
        envelope_value(g, n, kind, a.t, a.b, a.y, a.z, tol, arg, false);
    double arg2[3] = {0, 0, 0};
    const double vc =
        envelope_value(g, n, kind, c.t, c.b, c.y, c.z, tol, arg2, false);
    double dz = 0.0;
    for (std::size_t j = 0; j < a.z.size(); ++j) {
      const double d = a.z[j] - c.z[j];
      dz += d * d;
    }
    double bound = coeff * std::pow(std::sqrt(dz), g.params.alpha);
    if (joint) bound += coeff * std::fabs(a.y - c.y);
    const double slack = std::fabs(va - vc) - bound;
    if (slack > rep.worst_slack) {
      rep.worst_slack = slack;
      rep.worst_a = a;
      rep.worst_b = c;
    }
    if (slack > 2.0 * tol) ++rep.violation_count;
  }
  rep.pass = rep.violation_count == 0;
  if (sample_pairs.empty()) rep.worst_slack = 0.0;
  return rep;
}

}  // namespace bsde
