#include "termspace/core.hpp"
#include "termspace/random.hpp"

#include <cmath>
#include <cstring>
#include <unordered_set>

namespace termspace {

namespace {

struct ColumnHash {
  const Matrix* m;
  std::size_t operator()(Index j) const {
    std::size_t h = 1469598103934665603ull;
    for (Index i = 0; i < m->rows(); ++i) {
      double v = (*m)(i, j);
      if (v == 0.0) v = 0.0;  // fold -0.0
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      h = (h ^ bits) * 1099511628211ull;
    }
    return h;
  }
};

struct ColumnEq {
  const Matrix* m;
  bool operator()(Index a, Index b) const { return m->col(a) == m->col(b); }
};

}  // namespace

PointSet::PointSet(Matrix points, std::vector<std::int64_t> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
  if (points_.rows() < 1) throw InvalidArgument("PointSet: dimension must be >= 1");
  if (points_.cols() < 1) throw InvalidArgument("PointSet: need at least one point");
  if (!points_.allFinite()) throw InvalidArgument("PointSet: non-finite coordinate");
  if (!labels_.empty() && static_cast<Index>(labels_.size()) != points_.cols())
    throw InvalidArgument("PointSet: label count does not match point count");

  std::unordered_set<Index, ColumnHash, ColumnEq> seen(
      static_cast<std::size_t>(points_.cols()) * 2, ColumnHash{&points_}, ColumnEq{&points_});
  for (Index j = 0; j < points_.cols(); ++j) {
    if (!seen.insert(j).second)
      throw InvalidArgument("PointSet: duplicate point at index " + std::to_string(j));
  }
}

PointSet PointSet::from_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) throw InvalidArgument("PointSet: need at least one point");
  const Index d = rows.front().size();
  Matrix m(d, static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (rows[j].size() != d)
      throw InvalidArgument("PointSet: row " + std::to_string(j) + " has dimension " +
                            std::to_string(rows[j].size()) + ", expected " + std::to_string(d));
    m.col(static_cast<Index>(j)) = rows[j];
  }
  return PointSet(std::move(m));
}

const char* to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::finite: return "finite";
    case ShapeKind::circle: return "circle";
    case ShapeKind::sphere: return "sphere";
  }
  return "?";
}

GroundSet GroundSet::finite(PointSet points, double reach) {
  if (!(reach >= 0.0)) throw InvalidArgument("GroundSet: reach must be nonnegative");
  GroundSet g;
  g.kind_ = ShapeKind::finite;
  g.points_ = std::move(points);
  g.reach_ = reach;
  return g;
}

GroundSet GroundSet::circle(Vector center, double radius, Matrix plane_basis) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw InvalidArgument("GroundSet: circle radius must be positive");
  const Index d = center.size();
  if (d < 2) throw InvalidArgument("GroundSet: circle needs d >= 2");
  if (plane_basis.rows() != d || plane_basis.cols() != 2)
    throw InvalidArgument("GroundSet: circle plane basis must be d x 2");
  const Matrix gram = plane_basis.transpose() * plane_basis;
  if ((gram - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidArgument("GroundSet: circle plane basis must be orthonormal");
  GroundSet g;
  g.kind_ = ShapeKind::circle;
  g.center_ = std::move(center);
  g.radius_ = radius;
  g.basis_ = std::move(plane_basis);
  g.reach_ = radius;
  return g;
}

GroundSet GroundSet::sphere(Vector center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw InvalidArgument("GroundSet: sphere radius must be positive");
  if (center.size() < 1) throw InvalidArgument("GroundSet: sphere needs d >= 1");
  GroundSet g;
  g.kind_ = ShapeKind::sphere;
  g.center_ = std::move(center);
  g.radius_ = radius;
  g.reach_ = radius;
  return g;
}

Index GroundSet::dim() const { return is_finite() ? points_->dim() : center_.size(); }

const PointSet& GroundSet::points() const {
  if (!points_) throw InvalidArgument("GroundSet: analytic shape has no point list");
  return *points_;
}

const char* to_string(Variant v) { return v == Variant::finite ? "finite" : "cover"; }

Variant parse_variant(const std::string& s) {
  if (s == "finite") return Variant::finite;
  if (s == "cover") return Variant::cover;
  throw InvalidArgument("unknown variant '" + s + "' (expected finite|cover)");
}

EpsilonBudget make_budget(double epsilon, Variant variant) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw InvalidArgument("epsilon must lie in (0,1), got " + std::to_string(epsilon));
  EpsilonBudget b;
  b.epsilon = epsilon;
  b.cover_radius = epsilon / 40.0;
  if (variant == Variant::finite) {
    b.hull_distortion_target = epsilon / 60.0;
    b.constraint_slack = epsilon / 10.0;
  } else {
    b.hull_distortion_target = epsilon / 240.0;
    b.constraint_slack = epsilon / 30.0;
  }
  return b;
}

void SolverConfig::validate() const {
  if (!(feasibility_tolerance > 0.0)) throw InvalidArgument("feasibility_tolerance must be > 0");
  if (!(radicand_clamp > 0.0)) throw InvalidArgument("radicand_clamp must be > 0");
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
}

Vector sample_ground_point(const GroundSet& g, Rng& rng) {
  switch (g.kind()) {
    case ShapeKind::finite: {
      std::uniform_int_distribution<Index> pick(0, g.points().size() - 1);
      return g.points().point(pick(rng));
    }
    case ShapeKind::circle: {
      const double theta = 2.0 * M_PI * uniform01(rng);
      return g.center() + g.radius() * (std::cos(theta) * g.plane_basis().col(0) +
                                         std::sin(theta) * g.plane_basis().col(1));
    }
    case ShapeKind::sphere: {
      Vector v = standard_normal(rng, g.dim());
      return g.center() + g.radius() * v / v.norm();
    }
  }
  throw InvalidArgument("sample_ground_point: unknown shape");
}

}  // namespace termspace
