#pragma once

#include <cstdint>
#include <vector>

#include "termspace/core.hpp"
#include "termspace/embed.hpp"

namespace termspace {

/// Explicit local Hölder data at a query at distance `dist` from X.
struct HolderConstants {
  double r_u = 0.0;      // radius of the neighborhood the bound holds on
  double C_tilde = 0.0;  // constant of the selection β
  double C_prime = 0.0;  // constant of β composed with the nearest-point map
  double C_u = 0.0;      // 1/4-Hölder constant of f
  bool in_closure = false;
};

/// dist = 0: C' = 1200/ε on the ball of radius 1/2. dist > 0:
/// r_u = min(1, ε dist / 480), C̃ = max(1200, 480 + 128 sqrt(dist)) / ε,
/// C' = sqrt(6) C̃. Always C_u = sqrt(32 + 2C'^2 + (6 + 2C')(dist + 2)).
HolderConstants holder_constants(double dist, double epsilon);

/// Multiplicative slack separating solver error from genuine distortion.
inline constexpr double kNumericInflation = 1e-6;
/// Pairs closer than this are skipped.
inline constexpr double kMinPairDistance = 1e-12;
/// Queries closer than this to X use the in-closure Hölder constants.
inline constexpr double kClosureTolerance = 1e-12;

/// Law of the far endpoint y in terminal audits.
struct QueryDistribution {
  enum class Kind { box_gaussian, near_ground };
  /// box_gaussian: y ~ N(c, σ² I) with c the bounding-box center and
  /// σ = scale · diameter / sqrt(d). near_ground: y = x' + N(0, σ² I) with x'
  /// a fresh ground sample and the same σ.
  Kind kind = Kind::box_gaussian;
  double scale = 1.0;
};

struct PairViolation {
  Vector x, y;
  double ratio = 0.0;
};

struct AuditReport {
  long pairs_tested = 0;
  double min_ratio = kInfinity;
  double max_ratio = -kInfinity;
  std::vector<PairViolation> violations;  // first kMaxRecordedViolations, in pair order
  long violation_count = 0;
  bool pass = true;
  long excluded_ties = 0;  // pairs dropped because y had an ambiguous nearest point
  long skipped = 0;        // pairs with |x - y| below kMinPairDistance
};

inline constexpr std::size_t kMaxRecordedViolations = 100;

/// Samples `samples` pairs (x in X, y in R^d) and checks
/// (1-ε)|x-y| <= |f(x)-f(y)| <= (1+ε)|x-y| up to kNumericInflation.
AuditReport audit_terminal(const TerminalEmbedder& e, long samples, std::uint64_t seed,
                           const QueryDistribution& dist = {});

struct HolderAudit {
  double max_ratio = 0.0;
  double fitted_slope = 0.0;
  double bound = kInfinity;  // C_u for the cover variant, +inf for the finite one
  double radius = 0.0;       // sampling radius actually used
  long pairs_used = 0;
  bool pass = false;
  HolderConstants constants;
};

/// Samples pairs v, w near u and records max |f(v)-f(w)| / |v-w|^exponent and
/// the least-squares slope of log|f(v)-f(w)| against log|v-w|. v is uniform in
/// B(u, r/2) and w = v + s·θ with θ uniform on the sphere and s log-uniform in
/// [r/2000, r/2], so the pair distances span three decades. Finite variant:
/// r = min(r_u, Voronoi margin) and u must not be a tie. Cover variant: u must
/// lie in the half-reach tube and samples outside it are redrawn.
HolderAudit audit_holder(const TerminalEmbedder& e, const Vector& u, long pairs, double exponent,
                         std::uint64_t seed);

struct ConstraintAudit {
  long queries = 0;
  long probes = 0;                    // ground points replayed per query
  double max_norm_violation = 0.0;    // max(0, |u'| - |u - u_NN|)
  double max_angle_violation = 0.0;   // beyond (ε/10)|u - u_NN||x - u_NN|
  double max_cover_violation = 0.0;   // cover rows beyond (ε/30)|u - u_NN|
  double tolerance = 0.0;             // 10 · feasibility tolerance
  bool pass = true;
};

/// Replays each solved u' against the norm bound and the angle constraints at
/// slack ε/10 over every finite ground point, or `probe_points` fresh samples
/// of an analytic ground set (drawn once from `seed`).
ConstraintAudit audit_constraint_norms(const TerminalEmbedder& e, const Matrix& queries,
                                       int probe_points = 1000, std::uint64_t seed = 0);

/// Queries drawn from `dist` around the ground set (columns).
Matrix sample_queries(const GroundSet& g, long count, std::uint64_t seed, const QueryDistribution& dist = {});

}  // namespace termspace
