#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "termspace/core.hpp"
#include "termspace/randproj.hpp"

namespace termspace {

inline constexpr double kDefaultTieTolerance = 1e-9;
inline constexpr double kDefaultTubeFraction = 0.5;

struct NearestResult {
  Vector point;
  std::optional<Index> index;  // finite ground sets only
  double distance = 0.0;
  /// Another ground point lies within the tie tolerance of `distance`, or the
  /// query sits on the axis of an analytic shape.
  bool tie = false;
  /// distance < tube_fraction * reach.
  bool within_half_reach = false;
};

/// Exact nearest-neighbor index over the columns of a matrix.
class KdTree {
 public:
  explicit KdTree(const Matrix& points, Index leaf_size = 8);

  /// Squared distance to the nearest column.
  double nearest_squared(const Vector& u) const;
  /// Indices of all columns with squared distance <= r2, ascending.
  std::vector<Index> within(const Vector& u, double r2) const;

 private:
  struct Node {
    Index begin, end;      // range in perm_
    Index split_dim = -1;  // -1 for leaves
    double split = 0.0;
    int left = -1, right = -1;
  };
  int build(Index begin, Index end);
  void search_nearest(int node, const Vector& u, double& best) const;
  void search_within(int node, const Vector& u, double r2, std::vector<Index>& out) const;

  const Matrix* points_;
  Index leaf_size_;
  std::vector<Index> perm_;
  std::vector<Node> nodes_;
};

/// Nearest-point queries u -> u_NN against a ground set. Finite sets use a
/// kd-tree (linear scan when d > 30); ties resolve to the lowest index.
class NearestSearcher {
 public:
  explicit NearestSearcher(GroundSet ground, double tube_fraction = kDefaultTubeFraction);

  NearestResult query(const Vector& u, double tie_tolerance = kDefaultTieTolerance) const;

  const GroundSet& ground() const { return *ground_; }
  double tube_fraction() const { return tube_fraction_; }

 private:
  std::shared_ptr<const GroundSet> ground_;
  std::shared_ptr<const KdTree> tree_;
  double tube_fraction_;
};

/// Linear-scan reference for finite sets, closed form for analytic shapes.
NearestResult nearest(const GroundSet& g, const Vector& u,
                      double tie_tolerance = kDefaultTieTolerance,
                      double tube_fraction = kDefaultTubeFraction);

/// min over j != k of (|u - x_j| - |u - x_k|) / 2 where x_k is the nearest
/// point; any v closer than this to u keeps x_k as its unique nearest point.
/// Zero on ties, +inf for a single point.
double voronoi_interior_margin(const PointSet& x, const Vector& u,
                               double tie_tolerance = kDefaultTieTolerance);

struct CoverSet {
  Matrix centers;  // d x l, columns drawn from the source directions
  double radius = 0.0;
  double verified_radius = 0.0;
  std::vector<Index> source_indices;

  Index size() const { return centers.cols(); }
};

/// Farthest-point greedy net: starts at index 0, repeatedly adds the
/// direction farthest from the current centers (lowest index on ties) until
/// every direction is within `radius`.
CoverSet greedy_cover(const SecantSet& s, double radius);

/// max over v in S of min over w in C of |v - w|.
double covering_radius(const Matrix& points, const Matrix& centers);
double covering_radius(const SecantSet& s, const CoverSet& c);

}  // namespace termspace
