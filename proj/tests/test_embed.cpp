#include "doctest.h"

#include <cstdlib>

#include "oracles.hpp"
#include "termspace/embed.hpp"
#include "termspace/random.hpp"

using namespace termspace;

namespace {

Matrix gaussian_cloud(Index d, Index n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Matrix x(d, n);
  for (Index j = 0; j < n; ++j) x.col(j) = standard_normal(rng, d);
  return x;
}

// Points in a random 2-plane of R^5 with Π the coordinate map of that plane:
// exact on every secant, so certified with m = 2 < d.
struct PlanarCase {
  Matrix basis;
  PointSet points;
  ProjectionMatrix pi;
};

PlanarCase planar_case(Index n, std::uint64_t seed) {
  const Matrix basis = orthonormal_matrix(5, 2, seed).entries;
  const Matrix coords = gaussian_cloud(2, n, seed + 1);
  PointSet points(basis * coords);
  ProjectionMatrix pi;
  pi.entries = basis.transpose();
  const SecantSet s = unit_secants(points);
  pi.distortion_estimate = estimate_hull_distortion(pi, s, static_cast<int>(s.size()) + 64, 20, seed);
  return {basis, std::move(points), std::move(pi)};
}

TerminalEmbedder planar_embedder(double eps, std::uint64_t seed) {
  PlanarCase c = planar_case(12, seed);
  return TerminalEmbedder(GroundSet::finite(std::move(c.points)), std::move(c.pi), make_budget(eps, Variant::finite),
                          Variant::finite);
}

TerminalEmbedder circle_embedder(double eps, std::uint64_t seed) {
  const Matrix basis = orthonormal_matrix(6, 2, seed).entries;
  BuildOptions opts;
  opts.epsilon = eps;
  opts.variant = Variant::cover;
  opts.seed = seed;
  opts.secant_samples = 512;
  return build_embedder(GroundSet::circle(Vector::Zero(6), 1.0, basis), opts);
}

// Angle constraints written out directly: rows a = Π(x_i - u_NN), both signs.
void reference_system(const TerminalEmbedder& e, const Vector& u, Matrix& A, Vector& b) {
  const PointSet& x = e.ground().points();
  const Index k = oracle::linear_nearest(x.points(), u);
  const Vector base = x.point(k);
  const double dist = (u - base).norm();
  std::vector<Vector> rows;
  std::vector<double> rhs;
  for (Index i = 0; i < x.size(); ++i) {
    if (i == k) continue;
    const Vector diff = x.point(i) - base;
    const Vector a = e.projection().entries * diff;
    const double inner = (u - base).dot(diff);
    const double slack = e.budget().epsilon / 10.0 * dist * diff.norm();
    rows.push_back(a);
    rhs.push_back(inner + slack);
    rows.push_back(-a);
    rhs.push_back(slack - inner);
  }
  A.resize(static_cast<Index>(rows.size()), e.target_dim());
  b.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    A.row(static_cast<Index>(i)) = rows[i].transpose();
    b(static_cast<Index>(i)) = rhs[i];
  }
}

}  // namespace

TEST_CASE("ground points map to their projections") {
  const TerminalEmbedder e = planar_embedder(0.3, 1);
  const PointSet& x = e.ground().points();
  for (Index i = 0; i < x.size(); ++i) {
    const Evaluation ev = e.evaluate_detailed(x.point(i));
    CHECK(ev.value.head(2) == e.ground_image(i));
    CHECK(ev.value(2) == 0.0);
    CHECK(ev.u_prime.norm() == 0.0);
  }
  CHECK(e.output_dim() == 3);
}

TEST_CASE("solved u' matches an independently assembled system") {
  const TerminalEmbedder e = planar_embedder(0.4, 2);
  Rng rng = make_rng(3);
  for (int q = 0; q < 40; ++q) {
    const Vector u = 2.0 * standard_normal(rng, 5);
    Matrix A;
    Vector b;
    reference_system(e, u, A, b);
    const Vector ref = oracle::projected_gradient_min_norm(A, b);
    const Evaluation ev = e.evaluate_detailed(u);
    CHECK((ev.u_prime - ref).norm() <= 1e-6 * (1.0 + ref.norm()));
    CHECK(ev.constraint_rows == A.rows());
  }
}

TEST_CASE("assembled rows for the finite variant") {
  const TerminalEmbedder e = planar_embedder(0.5, 4);
  const Vector u = Vector::Constant(5, 0.3);
  const NearestResult nn = e.nearest(u);
  const auto sys = assemble_finite(e, u, nn);
  const Index n = e.ground().points().size();
  CHECK(sys.rows() == 2 * (n - 1));
  CHECK(sys.dropped() == 2);
  for (Index r = 0; r < n - 1; ++r) {
    CHECK(sys.normal(r) == -sys.normal(r + n - 1));
    CHECK(sys.origin(r) == sys.origin(r + n - 1));
  }
  CHECK_THROWS_AS(assemble_cover(e, u, nn), InvalidArgument);
}

TEST_CASE("base-point isometry identity") {
  for (const TerminalEmbedder& e : {planar_embedder(0.4, 5), circle_embedder(0.5, 5)}) {
    Rng rng = make_rng(6);
    for (int q = 0; q < 200; ++q) {
      const Vector u = 1.5 * standard_normal(rng, e.input_dim());
      const Evaluation ev = e.evaluate_detailed(u);
      const Vector fnn = e.evaluate(ev.nearest.point);
      const double lhs = (ev.value - fnn).norm();
      CHECK(std::abs(lhs - ev.nearest.distance) <= 1e-8 * (1.0 + ev.nearest.distance));
    }
  }
}

TEST_CASE("terminal condition with m below d") {
  const double eps = 0.3;
  const TerminalEmbedder e = planar_embedder(eps, 7);
  CHECK(e.target_dim() < e.input_dim());
  const PointSet& x = e.ground().points();
  Rng rng = make_rng(8);
  for (int q = 0; q < 300; ++q) {
    const Vector u = 2.0 * standard_normal(rng, 5);
    const Vector fu = e.evaluate(u);
    for (Index i = 0; i < x.size(); ++i) {
      const double ratio = (fu - e.evaluate(x.point(i))).norm() / (u - x.point(i)).norm();
      CHECK(ratio >= 1.0 - eps - 1e-6);
      CHECK(ratio <= 1.0 + eps + 1e-6);
    }
  }
}

TEST_CASE("norm and angle constraints hold at the solution") {
  const TerminalEmbedder e = planar_embedder(0.2, 9);
  const PointSet& x = e.ground().points();
  Rng rng = make_rng(10);
  for (int q = 0; q < 100; ++q) {
    const Vector u = standard_normal(rng, 5);
    const Evaluation ev = e.evaluate_detailed(u);
    CHECK(ev.u_prime.norm() <= ev.nearest.distance + 1e-9);
    for (Index i = 0; i < x.size(); ++i) {
      const Vector diff = x.point(i) - ev.nearest.point;
      const double lhs = std::abs(ev.u_prime.dot(e.projection().entries * diff) - (u - ev.nearest.point).dot(diff));
      CHECK(lhs <= 0.02 * ev.nearest.distance * diff.norm() + 1e-9);
    }
  }
}

TEST_CASE("cover variant rows and values") {
  const TerminalEmbedder e = circle_embedder(0.5, 11);
  REQUIRE(e.cover());
  CHECK(e.cover()->radius == 0.5 / 40.0);
  CHECK(e.cover()->verified_radius <= e.cover()->radius);
  CHECK(e.projection().distortion_estimate <= 0.5 / 240.0);
  const Vector u = Vector::Constant(6, 0.2);
  const auto sys = assemble_cover(e, u, e.nearest(u));
  CHECK(sys.rows() == 2 * e.cover()->size());
  CHECK_THROWS_AS(assemble_finite(e, u, e.nearest(u)), InvalidArgument);
  const Evaluation ev = e.evaluate_detailed(u);
  CHECK(ev.value.size() == e.output_dim());
  CHECK(ev.value(e.target_dim()) >= 0.0);
}

TEST_CASE("batch evaluation equals pointwise evaluation for any worker count") {
  const TerminalEmbedder e = circle_embedder(0.5, 12);
  Rng rng = make_rng(13);
  Matrix q(6, 64);
  for (Index j = 0; j < q.cols(); ++j) q.col(j) = standard_normal(rng, 6);
  setenv("TERMSPACE_THREADS", "1", 1);
  const Matrix one = evaluate_batch(e, q);
  setenv("TERMSPACE_THREADS", "5", 1);
  const Matrix five = evaluate_batch(e, q);
  unsetenv("TERMSPACE_THREADS");
  CHECK(one == five);
  for (Index j = 0; j < q.cols(); ++j) CHECK(one.col(j) == e.evaluate(q.col(j)));
  CHECK_THROWS_AS(evaluate_batch(e, Matrix::Zero(3, 2)), InvalidArgument);
}

TEST_CASE("ties still evaluate") {
  Matrix x(2, 2);
  x << -1, 1, 0, 0;
  ProjectionMatrix pi;
  pi.entries = Matrix::Identity(2, 2);
  pi.distortion_estimate = 0.0;
  const TerminalEmbedder e(GroundSet::finite(PointSet(x)), pi, make_budget(0.5, Variant::finite), Variant::finite);
  const Evaluation ev = e.evaluate_detailed(Eigen::Vector2d(0, 1));
  CHECK(ev.nearest.tie);
  CHECK(*ev.nearest.index == 0);
  CHECK(ev.value.size() == 3);
}

TEST_CASE("constructor validation") {
  PlanarCase c = planar_case(6, 14);
  const GroundSet g = GroundSet::finite(c.points);
  const EpsilonBudget fb = make_budget(0.5, Variant::finite);

  ProjectionMatrix uncertified = c.pi;
  uncertified.distortion_estimate = -1.0;
  CHECK_THROWS_AS(TerminalEmbedder(g, uncertified, fb, Variant::finite), InvalidArgument);
  ProjectionMatrix loose = c.pi;
  loose.distortion_estimate = 0.5;
  CHECK_THROWS_AS(TerminalEmbedder(g, loose, fb, Variant::finite), InvalidArgument);
  ProjectionMatrix wrong_dim = c.pi;
  wrong_dim.entries = Matrix::Identity(2, 4);
  CHECK_THROWS_AS(TerminalEmbedder(g, wrong_dim, fb, Variant::finite), InvalidArgument);
  CHECK_THROWS_AS(TerminalEmbedder(g, c.pi, make_budget(0.5, Variant::cover), Variant::finite), InvalidArgument);
  CHECK_THROWS_AS(TerminalEmbedder(g, c.pi, make_budget(0.5, Variant::cover), Variant::cover), InvalidArgument);

  const GroundSet circle = GroundSet::circle(Vector::Zero(5), 1.0, c.basis);
  CHECK_THROWS_AS(TerminalEmbedder(circle, c.pi, fb, Variant::finite), InvalidArgument);
  CoverSet cover;
  cover.centers = Matrix::Identity(5, 2);
  cover.radius = 0.1;
  CHECK_THROWS_AS(TerminalEmbedder(circle, c.pi, make_budget(0.5, Variant::cover), Variant::cover, cover),
                  InvalidArgument);

  const TerminalEmbedder ok(g, c.pi, fb, Variant::finite);
  CHECK_THROWS_AS(ok.evaluate(Vector::Zero(4)), InvalidArgument);
}

TEST_CASE("build_embedder certifies to the variant target") {
  BuildOptions opts;
  opts.epsilon = 0.4;
  opts.seed = 21;
  const TerminalEmbedder e = build_embedder(GroundSet::finite(PointSet(gaussian_cloud(6, 10, 21))), opts);
  CHECK(e.projection().distortion_estimate <= 0.4 / 60.0);
  CHECK(e.variant() == Variant::finite);
  CHECK_FALSE(e.cover());

  opts.variant = Variant::cover;
  const TerminalEmbedder c = build_embedder(GroundSet::finite(PointSet(gaussian_cloud(6, 10, 21))), opts);
  REQUIRE(c.cover());
  CHECK(c.projection().distortion_estimate <= 0.4 / 240.0);

  opts.variant = Variant::finite;
  CHECK_THROWS_AS(build_embedder(GroundSet::sphere(Vector::Zero(3), 1.0), opts), InvalidArgument);
  opts.m_cap = 2;
  opts.m0 = 2;
  CHECK_THROWS_AS(build_embedder(GroundSet::finite(PointSet(gaussian_cloud(6, 10, 21))), opts), CertificationFailure);
}
