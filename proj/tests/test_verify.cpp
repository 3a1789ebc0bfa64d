#include "doctest.h"

#include <cmath>

#include "termspace/random.hpp"
#include "termspace/verify.hpp"

using namespace termspace;

namespace {

Matrix gaussian_cloud(Index d, Index n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Matrix x(d, n);
  for (Index j = 0; j < n; ++j) x.col(j) = standard_normal(rng, d);
  return x;
}

TerminalEmbedder finite_embedder(const Matrix& x, double eps, std::uint64_t seed) {
  BuildOptions opts;
  opts.epsilon = eps;
  opts.seed = seed;
  return build_embedder(GroundSet::finite(PointSet(x)), opts);
}

TerminalEmbedder circle_embedder(const Vector& center, const Matrix& basis, double eps, std::uint64_t seed) {
  BuildOptions opts;
  opts.epsilon = eps;
  opts.variant = Variant::cover;
  opts.seed = seed;
  opts.secant_samples = 512;
  return build_embedder(GroundSet::circle(center, 1.0, basis), opts);
}

// Copy of `e` whose map doubles every length while claiming certification.
TerminalEmbedder stretched(const TerminalEmbedder& e) {
  ProjectionMatrix pi = e.projection();
  pi.entries *= 2.0;
  return TerminalEmbedder(e.ground(), pi, e.budget(), e.variant(), e.cover(), e.solver());
}

}  // namespace

TEST_CASE("holder constants away from X") {
  const HolderConstants h = holder_constants(1.0, 0.5);
  CHECK_FALSE(h.in_closure);
  CHECK(h.C_tilde == doctest::Approx(2400.0));
  CHECK(h.C_prime == doctest::Approx(std::sqrt(6.0) * 2400.0));
  CHECK(h.C_prime == doctest::Approx(5878.775).epsilon(1e-6));
  CHECK(h.r_u == doctest::Approx(0.5 / 480.0));
  const double cp = h.C_prime;
  CHECK(h.C_u == doctest::Approx(std::sqrt(32 + 2 * cp * cp + (6 + 2 * cp) * 3.0)));
}

TEST_CASE("holder constants in the closure") {
  const HolderConstants h = holder_constants(0.0, 0.5);
  CHECK(h.in_closure);
  CHECK(h.r_u == 0.5);
  CHECK(h.C_prime == 2400.0);
  CHECK(h.C_u == doctest::Approx(std::sqrt(32.0 + 2.0 * 2400.0 * 2400.0 + 4806.0 * 2.0)).epsilon(1e-14));
  CHECK(h.C_u == doctest::Approx(3395.53).epsilon(1e-6));
}

TEST_CASE("holder constants branch and limits") {
  for (double dist : {1e-9, 0.25, 0.5, 0.999}) CHECK(holder_constants(dist, 0.4).C_tilde == 1200.0 / 0.4);
  // The second branch of the max takes over past (720/128)^2.
  const double knee = (720.0 / 128.0) * (720.0 / 128.0);
  CHECK(holder_constants(knee * 0.99, 0.5).C_tilde == 2400.0);
  CHECK(holder_constants(knee * 1.01, 0.5).C_tilde > 2400.0);
  CHECK(holder_constants(knee * (1 + 1e-9), 0.5).C_tilde == doctest::Approx(2400.0).epsilon(1e-8));
  CHECK(holder_constants(100.0, 0.5).C_tilde == doctest::Approx((480.0 + 1280.0) / 0.5));
  CHECK(holder_constants(5000.0, 0.5).r_u == 1.0);
  // Constants weakly decrease as epsilon grows.
  for (double dist : {0.0, 0.1, 3.0, 50.0}) {
    double prev = kInfinity;
    for (double eps = 0.05; eps < 1.0; eps += 0.05) {
      const HolderConstants h = holder_constants(dist, eps);
      CHECK(h.C_u <= prev);
      CHECK(h.C_u > 0.0);
      CHECK(h.r_u > 0.0);
      prev = h.C_u;
    }
  }
  CHECK_THROWS_AS(holder_constants(-1.0, 0.5), InvalidArgument);
  CHECK_THROWS_AS(holder_constants(1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(holder_constants(1.0, 0.0), InvalidArgument);
}

TEST_CASE("terminal audit passes on a certified finite build") {
  const TerminalEmbedder e = finite_embedder(gaussian_cloud(6, 20, 1), 0.4, 1);
  const AuditReport r = audit_terminal(e, 2000, 5);
  CHECK(r.pass);
  CHECK(r.violations.empty());
  CHECK(r.violation_count == 0);
  CHECK(r.pairs_tested + r.excluded_ties + r.skipped == 2000);
  CHECK(r.min_ratio >= 0.6 - 1e-6);
  CHECK(r.max_ratio <= 1.4 + 1e-6);

  const AuditReport again = audit_terminal(e, 2000, 5);
  CHECK(again.min_ratio == r.min_ratio);
  CHECK(again.max_ratio == r.max_ratio);

  QueryDistribution near;
  near.kind = QueryDistribution::Kind::near_ground;
  near.scale = 0.05;
  CHECK(audit_terminal(e, 1000, 6, near).pass);
  CHECK_THROWS_AS(audit_terminal(e, 0, 1), InvalidArgument);
}

TEST_CASE("terminal audit reports a stretched map") {
  const TerminalEmbedder bad = stretched(finite_embedder(gaussian_cloud(4, 10, 2), 0.3, 2));
  const AuditReport r = audit_terminal(bad, 500, 1);
  CHECK_FALSE(r.pass);
  CHECK(r.violation_count > 0);
  CHECK(r.violations.size() == std::min<std::size_t>(kMaxRecordedViolations, static_cast<std::size_t>(r.violation_count)));
  CHECK(r.max_ratio > 1.3);
  for (const PairViolation& v : r.violations) CHECK(v.ratio > 1.3 + 1e-6);
}

TEST_CASE("terminal audit on a cover build") {
  const Matrix basis = orthonormal_matrix(8, 2, 3).entries;
  const TerminalEmbedder e = circle_embedder(Vector::Zero(8), basis, 0.5, 3);
  const AuditReport r = audit_terminal(e, 1500, 4);
  CHECK(r.pass);
  CHECK(r.pairs_tested > 1400);
}

TEST_CASE("holder audit, cover variant") {
  Matrix basis = Matrix::Zero(4, 2);
  basis(0, 0) = basis(1, 1) = 1.0;
  const TerminalEmbedder e = circle_embedder(Vector::Zero(4), basis, 0.5, 4);

  const Vector on_circle = Eigen::Vector4d(0.6, 0.8, 0, 0);
  const HolderAudit h0 = audit_holder(e, on_circle, 300, 0.25, 1);
  CHECK(h0.constants.in_closure);
  CHECK(h0.bound == doctest::Approx(holder_constants(0.0, 0.5).C_u));
  CHECK(h0.pass);

  const Vector off = Eigen::Vector4d(0.75, 1.0, 0, 0);  // distance 0.25
  const HolderAudit h = audit_holder(e, off, 300, 0.25, 1);
  CHECK(h.bound == doctest::Approx(holder_constants(0.25, 0.5).C_u));
  CHECK(h.radius == doctest::Approx(0.5 * 0.25 / 480.0));
  CHECK(h.max_ratio <= h.bound);
  CHECK(h.fitted_slope >= 0.15);
  CHECK(h.pass);
  CHECK(h.pairs_used == 300);

  const HolderAudit again = audit_holder(e, off, 300, 0.25, 1);
  CHECK(again.max_ratio == h.max_ratio);
  CHECK(again.fitted_slope == h.fitted_slope);

  CHECK_THROWS_AS(audit_holder(e, Eigen::Vector4d(1.6, 0, 0, 0), 100, 0.25, 1), InvalidArgument);
  CHECK_THROWS_AS(audit_holder(e, Eigen::Vector4d(0, 0, 0.1, 0), 100, 0.25, 1), InvalidArgument);
  CHECK_THROWS_AS(audit_holder(e, off, 100, 0.3, 1), InvalidArgument);
  CHECK_THROWS_AS(audit_holder(e, off, 1, 0.25, 1), InvalidArgument);
}

TEST_CASE("holder audit is translation invariant") {
  Matrix basis = Matrix::Zero(4, 2);
  basis(0, 0) = basis(1, 1) = 1.0;
  const Vector shift = Eigen::Vector4d(3.0, -2.0, 0.5, 1.0);
  const TerminalEmbedder a = circle_embedder(Vector::Zero(4), basis, 0.5, 7);
  const TerminalEmbedder b = circle_embedder(shift, basis, 0.5, 7);
  const Vector u = Eigen::Vector4d(0.0, 1.2, 0.0, 0.0);
  const HolderAudit ha = audit_holder(a, u, 200, 0.25, 3);
  const HolderAudit hb = audit_holder(b, u + shift, 200, 0.25, 3);
  CHECK(hb.max_ratio == doctest::Approx(ha.max_ratio).epsilon(1e-6));
  CHECK(hb.fitted_slope == doctest::Approx(ha.fitted_slope).epsilon(1e-4));
  CHECK(hb.bound == ha.bound);
}

TEST_CASE("holder audit, finite variant") {
  const Matrix x = gaussian_cloud(5, 15, 8);
  const TerminalEmbedder e = finite_embedder(x, 0.4, 8);
  Rng rng = make_rng(9);
  for (int t = 0; t < 5; ++t) {
    const Vector u = standard_normal(rng, 5);
    const HolderAudit h = audit_holder(e, u, 200, 0.5, static_cast<std::uint64_t>(t));
    CHECK(std::isinf(h.bound));
    CHECK(h.radius <= voronoi_interior_margin(e.ground().points(), u));
    CHECK(h.fitted_slope >= 0.4);
    CHECK(h.pass);
  }
  Matrix two(2, 2);
  two << -1, 1, 0, 0;
  const TerminalEmbedder pair = finite_embedder(two, 0.4, 1);
  CHECK_THROWS_AS(audit_holder(pair, Eigen::Vector2d(0, 3), 100, 0.5, 1), InvalidArgument);
}

TEST_CASE("constraint replay") {
  const Matrix x = gaussian_cloud(5, 25, 10);
  const TerminalEmbedder e = finite_embedder(x, 0.3, 10);
  const ConstraintAudit at_ground = audit_constraint_norms(e, x);
  CHECK(at_ground.pass);
  CHECK(at_ground.max_norm_violation == 0.0);
  CHECK(at_ground.max_angle_violation == 0.0);

  const Matrix q = sample_queries(e.ground(), 300, 11);
  const ConstraintAudit c = audit_constraint_norms(e, q);
  CHECK(c.pass);
  CHECK(c.queries == 300);
  CHECK(c.probes == 25);
  CHECK(c.max_norm_violation <= 1e-8);
  CHECK(c.max_angle_violation <= 1e-8);
  CHECK_THROWS_AS(audit_constraint_norms(e, Matrix::Zero(3, 2)), InvalidArgument);
}

TEST_CASE("constraint replay, cover variant probes fresh ground points") {
  const Matrix basis = orthonormal_matrix(6, 2, 12).entries;
  const TerminalEmbedder e = circle_embedder(Vector::Zero(6), basis, 0.5, 12);
  const Matrix q = sample_queries(e.ground(), 200, 13);
  const ConstraintAudit c = audit_constraint_norms(e, q, 1000, 14);
  CHECK(c.probes == 1000);
  CHECK(c.max_norm_violation <= 1e-8);
  CHECK(c.max_angle_violation <= 1e-8);
  CHECK(c.max_cover_violation <= 1e-8);
  CHECK(c.pass);
}

TEST_CASE("sample_queries is reproducible") {
  const GroundSet g = GroundSet::sphere(Vector::Ones(3), 2.0);
  CHECK(sample_queries(g, 10, 1) == sample_queries(g, 10, 1));
  CHECK(sample_queries(g, 10, 1) != sample_queries(g, 10, 2));
  CHECK_THROWS_AS(sample_queries(g, 5, 1, QueryDistribution{QueryDistribution::Kind::box_gaussian, 0.0}),
                  InvalidArgument);
}
