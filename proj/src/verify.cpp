#include "termspace/verify.hpp"

#include <algorithm>
#include <cmath>

#include "termspace/parallel.hpp"
#include "termspace/random.hpp"

namespace termspace {

namespace {

constexpr long kAuditChunk = 256;
constexpr long kHolderChunk = 128;
constexpr int kMaxRedraws = 64;

struct Frame {
  Vector center;
  double diameter = 0.0;
};

Frame ground_frame(const GroundSet& g) {
  if (!g.is_finite()) return {g.center(), 2.0 * g.radius()};
  const Matrix& p = g.points().points();
  const Vector lo = p.rowwise().minCoeff();
  const Vector hi = p.rowwise().maxCoeff();
  double diameter = (hi - lo).norm();
  if (diameter == 0.0) diameter = 1.0;  // single point
  return {0.5 * (lo + hi), diameter};
}

Vector draw_query(const GroundSet& g, const Frame& frame, const QueryDistribution& dist, Rng& rng) {
  const double sigma = dist.scale * frame.diameter / std::sqrt(static_cast<double>(g.dim()));
  if (dist.kind == QueryDistribution::Kind::near_ground) {
    Vector base = sample_ground_point(g, rng);
    return base + sigma * standard_normal(rng, g.dim());
  }
  return frame.center + sigma * standard_normal(rng, g.dim());
}

Vector uniform_in_ball(Rng& rng, Index d, double radius) {
  Vector g = standard_normal(rng, d);
  const double scale = radius * std::pow(uniform01(rng), 1.0 / static_cast<double>(d));
  return scale * g / g.norm();
}

Vector unit_direction(Rng& rng, Index d) {
  Vector g = standard_normal(rng, d);
  return g / g.norm();
}

long chunk_count(long total, long chunk) { return (total + chunk - 1) / chunk; }

}  // namespace

HolderConstants holder_constants(double dist, double epsilon) {
  if (!(dist >= 0.0) || !std::isfinite(dist)) throw InvalidArgument("holder_constants: dist must be >= 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("holder_constants: epsilon must lie in (0,1)");
  HolderConstants h;
  if (dist == 0.0) {
    h.in_closure = true;
    h.r_u = 0.5;
    h.C_tilde = 1200.0 / epsilon;
    h.C_prime = 1200.0 / epsilon;
  } else {
    h.r_u = std::min(1.0, epsilon * dist / 480.0);
    h.C_tilde = std::max(1200.0, 480.0 + 128.0 * std::sqrt(dist)) / epsilon;
    h.C_prime = std::sqrt(6.0) * h.C_tilde;
  }
  h.C_u = std::sqrt(32.0 + 2.0 * h.C_prime * h.C_prime + (6.0 + 2.0 * h.C_prime) * (dist + 2.0));
  return h;
}

Matrix sample_queries(const GroundSet& g, long count, std::uint64_t seed, const QueryDistribution& dist) {
  if (count < 0) throw InvalidArgument("sample_queries: count must be >= 0");
  if (!(dist.scale > 0.0)) throw InvalidArgument("sample_queries: scale must be > 0");
  const Frame frame = ground_frame(g);
  Matrix out(g.dim(), count);
  Rng rng = make_rng(seed);
  for (long j = 0; j < count; ++j) out.col(j) = draw_query(g, frame, dist, rng);
  return out;
}

// ---------------------------------------------------------------------------
// Terminal condition

AuditReport audit_terminal(const TerminalEmbedder& e, long samples, std::uint64_t seed,
                           const QueryDistribution& dist) {
  if (samples < 1) throw InvalidArgument("audit_terminal: samples must be >= 1");
  if (!(dist.scale > 0.0)) throw InvalidArgument("audit_terminal: scale must be > 0");
  const GroundSet& g = e.ground();
  const Frame frame = ground_frame(g);
  const double eps = e.budget().epsilon;
  const double lo = 1.0 - eps - kNumericInflation;
  const double hi = 1.0 + eps + kNumericInflation;

  const long chunks = chunk_count(samples, kAuditChunk);
  std::vector<AuditReport> partial(static_cast<std::size_t>(chunks));
  parallel_for(partial.size(), [&](std::size_t c) {
    AuditReport& r = partial[c];
    Rng rng = make_rng(seed, c);
    const long begin = static_cast<long>(c) * kAuditChunk;
    const long end = std::min(samples, begin + kAuditChunk);
    for (long p = begin; p < end; ++p) {
      const Vector x = sample_ground_point(g, rng);
      const Vector y = draw_query(g, frame, dist, rng);
      const double dxy = (x - y).norm();
      if (dxy < kMinPairDistance) {
        ++r.skipped;
        continue;
      }
      const Evaluation fy = e.evaluate_detailed(y);
      if (fy.nearest.tie) {
        ++r.excluded_ties;
        continue;
      }
      const double ratio = (e.evaluate(x) - fy.value).norm() / dxy;
      ++r.pairs_tested;
      r.min_ratio = std::min(r.min_ratio, ratio);
      r.max_ratio = std::max(r.max_ratio, ratio);
      if (!(ratio >= lo && ratio <= hi)) {
        ++r.violation_count;
        if (r.violations.size() < kMaxRecordedViolations) r.violations.push_back({x, y, ratio});
      }
    }
  });

  AuditReport out;
  for (AuditReport& r : partial) {
    out.pairs_tested += r.pairs_tested;
    out.min_ratio = std::min(out.min_ratio, r.min_ratio);
    out.max_ratio = std::max(out.max_ratio, r.max_ratio);
    out.violation_count += r.violation_count;
    out.excluded_ties += r.excluded_ties;
    out.skipped += r.skipped;
    for (PairViolation& v : r.violations)
      if (out.violations.size() < kMaxRecordedViolations) out.violations.push_back(std::move(v));
  }
  out.pass = out.violation_count == 0;
  return out;
}

// ---------------------------------------------------------------------------
// Hölder regularity

HolderAudit audit_holder(const TerminalEmbedder& e, const Vector& u, long pairs, double exponent,
                         std::uint64_t seed) {
  if (pairs < 2) throw InvalidArgument("audit_holder: need at least two pairs");
  if (std::abs(exponent - 0.25) > 1e-12 && std::abs(exponent - 0.5) > 1e-12)
    throw InvalidArgument("audit_holder: exponent must be 1/4 or 1/2");
  if (u.size() != e.input_dim()) throw InvalidArgument("audit_holder: dimension mismatch");

  const NearestResult nn = e.nearest(u);
  if (nn.tie) throw InvalidArgument("audit_holder: u has an ambiguous nearest point");
  const bool cover = e.variant() == Variant::cover;
  if (cover && !nn.within_half_reach) throw InvalidArgument("audit_holder: u lies outside the half-reach tube");

  HolderAudit out;
  const double dist = nn.distance <= kClosureTolerance ? 0.0 : nn.distance;
  out.constants = holder_constants(dist, e.budget().epsilon);
  double r = out.constants.r_u;
  if (!cover && e.ground().is_finite()) {
    const double margin = voronoi_interior_margin(e.ground().points(), u);
    if (!(margin > 0.0)) throw InvalidArgument("audit_holder: u has no Voronoi interior margin");
    r = std::min(r, margin);
  }
  out.radius = r;
  out.bound = cover ? out.constants.C_u : kInfinity;

  const Index d = e.input_dim();
  auto admissible = [&](const Vector& v) {
    if (!cover) return true;
    const NearestResult q = e.nearest(v);
    return q.within_half_reach && !q.tie;
  };

  struct Sample {
    double log_dx = 0.0, log_df = 0.0, ratio = 0.0;
    bool used = false, finite_log = false;
  };
  std::vector<Sample> samples(static_cast<std::size_t>(pairs));
  const long chunks = chunk_count(pairs, kHolderChunk);
  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    Rng rng = make_rng(seed, c);
    const long begin = static_cast<long>(c) * kHolderChunk;
    const long end = std::min(pairs, begin + kHolderChunk);
    for (long p = begin; p < end; ++p) {
      for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        const Vector v = u + uniform_in_ball(rng, d, 0.5 * r);
        const double s = 0.5 * r * std::pow(10.0, -3.0 * uniform01(rng));
        const Vector w = v + s * unit_direction(rng, d);
        if (!admissible(v) || !admissible(w)) continue;
        const double dx = (v - w).norm();
        if (dx < kMinPairDistance) continue;
        const double df = (e.evaluate(v) - e.evaluate(w)).norm();
        Sample& out_s = samples[static_cast<std::size_t>(p)];
        out_s.used = true;
        out_s.ratio = df / std::pow(dx, exponent);
        out_s.log_dx = std::log(dx);
        out_s.finite_log = df > 0.0;
        if (out_s.finite_log) out_s.log_df = std::log(df);
        break;
      }
    }
  });

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  long fitted = 0;
  for (const Sample& s : samples) {
    if (!s.used) continue;
    ++out.pairs_used;
    out.max_ratio = std::max(out.max_ratio, s.ratio);
    if (!s.finite_log) continue;
    ++fitted;
    sx += s.log_dx;
    sy += s.log_df;
    sxx += s.log_dx * s.log_dx;
    sxy += s.log_dx * s.log_df;
  }
  const double nf = static_cast<double>(fitted);
  const double var = sxx - sx * sx / std::max(nf, 1.0);
  out.fitted_slope = fitted >= 2 && var > 0.0 ? (sxy - sx * sy / nf) / var : std::nan("");
  out.pass = out.pairs_used >= 2 && out.max_ratio <= out.bound && out.fitted_slope >= exponent - 0.1;
  return out;
}

// ---------------------------------------------------------------------------
// Constraint replay

ConstraintAudit audit_constraint_norms(const TerminalEmbedder& e, const Matrix& queries, int probe_points,
                                       std::uint64_t seed) {
  if (queries.rows() != e.input_dim()) throw InvalidArgument("audit_constraint_norms: dimension mismatch");
  const GroundSet& g = e.ground();
  Matrix probes;
  if (g.is_finite()) {
    probes = g.points().points();
  } else {
    if (probe_points < 1) throw InvalidArgument("audit_constraint_norms: probe_points must be >= 1");
    probes.resize(g.dim(), probe_points);
    Rng rng = make_rng(seed);
    for (int j = 0; j < probe_points; ++j) probes.col(j) = sample_ground_point(g, rng);
  }
  const double angle = angle_slack(e.budget());
  const double cover_slack = e.budget().constraint_slack;
  const bool cover = e.variant() == Variant::cover;

  struct Worst {
    double norm = 0.0, angle = 0.0, cover = 0.0;
  };
  std::vector<Worst> worst(static_cast<std::size_t>(queries.cols()));
  parallel_for(worst.size(), [&](std::size_t j) {
    const Vector u = queries.col(static_cast<Index>(j));
    const Evaluation ev = e.evaluate_detailed(u);
    const double dist = ev.nearest.distance;
    const Vector r = u - ev.nearest.point;
    Worst& w = worst[j];
    w.norm = std::max(0.0, ev.u_prime.norm() - dist);
    for (Index i = 0; i < probes.cols(); ++i) {
      const Vector diff = probes.col(i) - ev.nearest.point;
      const double lhs = std::abs(ev.u_prime.dot(e.project(diff)) - r.dot(diff));
      w.angle = std::max(w.angle, lhs - angle * dist * diff.norm());
    }
    if (cover) {
      const CoverSet& c = *e.cover();
      for (Index i = 0; i < c.size(); ++i) {
        const double lhs = std::abs(ev.u_prime.dot(e.cover_image(i)) - r.dot(c.centers.col(i)));
        w.cover = std::max(w.cover, lhs - cover_slack * dist);
      }
    }
  });

  ConstraintAudit out;
  out.queries = queries.cols();
  out.probes = probes.cols();
  out.tolerance = 10.0 * e.solver().feasibility_tolerance;
  for (const Worst& w : worst) {
    out.max_norm_violation = std::max(out.max_norm_violation, w.norm);
    out.max_angle_violation = std::max(out.max_angle_violation, std::max(0.0, w.angle));
    out.max_cover_violation = std::max(out.max_cover_violation, std::max(0.0, w.cover));
  }
  out.pass = out.max_norm_violation <= out.tolerance && out.max_angle_violation <= out.tolerance &&
             out.max_cover_violation <= out.tolerance;
  return out;
}

}  // namespace termspace
