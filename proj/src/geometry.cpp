#include "termspace/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace termspace {

namespace {

constexpr Index kLinearScanAbove = 30;

NearestResult analytic_nearest(const GroundSet& g, const Vector& u, double tie_tolerance) {
  NearestResult r;
  const Vector w = u - g.center();
  if (g.kind() == ShapeKind::circle) {
    const Matrix& basis = g.plane_basis();
    const Eigen::Vector2d y = basis.transpose() * w;
    const double rho = y.norm();
    if (rho <= tie_tolerance) {
      r.tie = true;
      r.point = g.center() + g.radius() * basis.col(0);
    } else {
      r.point = g.center() + (g.radius() / rho) * (basis * y);
    }
  } else {
    const double rho = w.norm();
    if (rho <= tie_tolerance) {
      r.tie = true;
      r.point = g.center();
      r.point(0) += g.radius();
    } else {
      r.point = g.center() + (g.radius() / rho) * w;
    }
  }
  r.distance = (u - r.point).norm();
  return r;
}

// Lowest-index candidate among those within `tie_tolerance` of the best
// distance; `tie` when more than one qualifies.
NearestResult finalize_finite(const PointSet& x, const Vector& u, const std::vector<Index>& cand) {
  NearestResult r;
  const Index k = *std::min_element(cand.begin(), cand.end());
  r.index = k;
  r.point = x.point(k);
  r.distance = (u - r.point).norm();
  r.tie = cand.size() > 1;
  return r;
}

void set_tube_flag(NearestResult& r, double reach, double fraction) {
  r.within_half_reach = std::isinf(reach) ? true : r.distance < fraction * reach;
}

void check_dim(const GroundSet& g, const Vector& u) {
  if (u.size() != g.dim())
    throw InvalidArgument("nearest: query has dimension " + std::to_string(u.size()) +
                          ", ground set has " + std::to_string(g.dim()));
}

std::vector<Index> linear_candidates(const PointSet& x, const Vector& u, double tie_tolerance) {
  std::vector<double> dist(static_cast<std::size_t>(x.size()));
  double best = kInfinity;
  for (Index j = 0; j < x.size(); ++j) {
    dist[static_cast<std::size_t>(j)] = (x.point(j) - u).norm();
    best = std::min(best, dist[static_cast<std::size_t>(j)]);
  }
  std::vector<Index> cand;
  for (Index j = 0; j < x.size(); ++j)
    if (dist[static_cast<std::size_t>(j)] <= best + tie_tolerance) cand.push_back(j);
  return cand;
}

}  // namespace

// ---------------------------------------------------------------------------
// KdTree

KdTree::KdTree(const Matrix& points, Index leaf_size) : points_(&points), leaf_size_(leaf_size) {
  perm_.resize(static_cast<std::size_t>(points.cols()));
  std::iota(perm_.begin(), perm_.end(), 0);
  if (!perm_.empty()) build(0, points.cols());
}

int KdTree::build(Index begin, Index end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  const Matrix& p = *points_;
  Index dim = 0;
  double spread = -1.0;
  for (Index i = 0; i < p.rows(); ++i) {
    double lo = kInfinity, hi = -kInfinity;
    for (Index t = begin; t < end; ++t) {
      const double v = p(i, perm_[static_cast<std::size_t>(t)]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > spread) {
      spread = hi - lo;
      dim = i;
    }
  }
  if (spread <= 0.0) return id;

  const Index mid = begin + (end - begin) / 2;
  std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                   [&](Index a, Index b) { return p(dim, a) < p(dim, b); });
  nodes_[static_cast<std::size_t>(id)].split_dim = dim;
  nodes_[static_cast<std::size_t>(id)].split = p(dim, perm_[static_cast<std::size_t>(mid)]);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

void KdTree::search_nearest(int id, const Vector& u, double& best) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.split_dim < 0) {
    for (Index t = n.begin; t < n.end; ++t)
      best = std::min(best, (points_->col(perm_[static_cast<std::size_t>(t)]) - u).squaredNorm());
    return;
  }
  const double diff = u(n.split_dim) - n.split;
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;
  search_nearest(near, u, best);
  if (diff * diff <= best) search_nearest(far, u, best);
}

void KdTree::search_within(int id, const Vector& u, double r2, std::vector<Index>& out) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.split_dim < 0) {
    for (Index t = n.begin; t < n.end; ++t) {
      const Index j = perm_[static_cast<std::size_t>(t)];
      if ((points_->col(j) - u).squaredNorm() <= r2) out.push_back(j);
    }
    return;
  }
  const double diff = u(n.split_dim) - n.split;
  if (diff < 0.0 || diff * diff <= r2) search_within(n.left, u, r2, out);
  if (diff >= 0.0 || diff * diff <= r2) search_within(n.right, u, r2, out);
}

double KdTree::nearest_squared(const Vector& u) const {
  double best = kInfinity;
  if (!nodes_.empty()) search_nearest(0, u, best);
  return best;
}

std::vector<Index> KdTree::within(const Vector& u, double r2) const {
  std::vector<Index> out;
  if (!nodes_.empty()) search_within(0, u, r2, out);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Nearest-point queries

NearestSearcher::NearestSearcher(GroundSet ground, double tube_fraction)
    : ground_(std::make_shared<const GroundSet>(std::move(ground))), tube_fraction_(tube_fraction) {
  if (!(tube_fraction > 0.0 && tube_fraction <= 1.0))
    throw InvalidArgument("NearestSearcher: tube fraction must lie in (0,1]");
  if (ground_->is_finite() && ground_->dim() <= kLinearScanAbove)
    tree_ = std::make_shared<const KdTree>(ground_->points().points());
}

NearestResult NearestSearcher::query(const Vector& u, double tie_tolerance) const {
  check_dim(*ground_, u);
  NearestResult r;
  if (!ground_->is_finite()) {
    r = analytic_nearest(*ground_, u, tie_tolerance);
  } else if (!tree_) {
    r = finalize_finite(ground_->points(), u, linear_candidates(ground_->points(), u, tie_tolerance));
  } else {
    const double best = std::sqrt(tree_->nearest_squared(u));
    // Pad the radius by a few ulps so the recomputed norms of every candidate
    // satisfy dist <= best + tol as in the linear scan.
    const double reach = (best + tie_tolerance) * (1.0 + 4e-16);
    std::vector<Index> cand = tree_->within(u, reach * reach);
    std::vector<Index> kept;
    for (Index j : cand)
      if ((ground_->points().point(j) - u).norm() <= best + tie_tolerance) kept.push_back(j);
    if (kept.empty()) kept = linear_candidates(ground_->points(), u, tie_tolerance);
    r = finalize_finite(ground_->points(), u, kept);
  }
  set_tube_flag(r, ground_->reach(), tube_fraction_);
  return r;
}

NearestResult nearest(const GroundSet& g, const Vector& u, double tie_tolerance, double tube_fraction) {
  check_dim(g, u);
  NearestResult r = g.is_finite()
                        ? finalize_finite(g.points(), u, linear_candidates(g.points(), u, tie_tolerance))
                        : analytic_nearest(g, u, tie_tolerance);
  set_tube_flag(r, g.reach(), tube_fraction);
  return r;
}

double voronoi_interior_margin(const PointSet& x, const Vector& u, double tie_tolerance) {
  if (u.size() != x.dim()) throw InvalidArgument("voronoi_interior_margin: dimension mismatch");
  if (x.size() == 1) return kInfinity;
  const auto cand = linear_candidates(x, u, tie_tolerance);
  if (cand.size() > 1) return 0.0;
  const Index k = cand.front();
  const double dk = (x.point(k) - u).norm();
  double margin = kInfinity;
  for (Index j = 0; j < x.size(); ++j)
    if (j != k) margin = std::min(margin, 0.5 * ((x.point(j) - u).norm() - dk));
  return margin;
}

// ---------------------------------------------------------------------------
// Covers

CoverSet greedy_cover(const SecantSet& s, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("greedy_cover: radius must be > 0");
  const Index k = s.size();
  if (k == 0) throw InvalidArgument("greedy_cover: empty secant set");

  std::vector<Index> chosen{0};
  Vector mind(k);
  for (Index j = 0; j < k; ++j) mind(j) = (s.directions.col(j) - s.directions.col(0)).norm();
  double verified;
  for (;;) {
    Index far = 0;
    verified = mind.maxCoeff(&far);  // first maximal index
    if (verified <= radius) break;
    chosen.push_back(far);
    for (Index j = 0; j < k; ++j)
      mind(j) = std::min(mind(j), (s.directions.col(j) - s.directions.col(far)).norm());
  }

  CoverSet c;
  c.radius = radius;
  c.verified_radius = verified;
  c.source_indices = chosen;
  c.centers.resize(s.dim(), static_cast<Index>(chosen.size()));
  for (std::size_t t = 0; t < chosen.size(); ++t) c.centers.col(static_cast<Index>(t)) = s.directions.col(chosen[t]);
  return c;
}

double covering_radius(const Matrix& points, const Matrix& centers) {
  if (points.cols() == 0 || centers.cols() == 0) throw InvalidArgument("covering_radius: empty set");
  if (points.rows() != centers.rows()) throw InvalidArgument("covering_radius: dimension mismatch");
  double worst = 0.0;
  for (Index j = 0; j < points.cols(); ++j) {
    double best = kInfinity;
    for (Index c = 0; c < centers.cols() && best > worst; ++c)
      best = std::min(best, (points.col(j) - centers.col(c)).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

double covering_radius(const SecantSet& s, const CoverSet& c) { return covering_radius(s.directions, c.centers); }

}  // namespace termspace
