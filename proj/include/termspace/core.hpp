#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace termspace {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when the growth loop cannot certify a projection below its target.
struct CertificationFailure : std::runtime_error {
  CertificationFailure(const std::string& what, int best_m, double best_estimate)
      : std::runtime_error(what), best_m(best_m), best_estimate(best_estimate) {}
  int best_m;
  double best_estimate;
};

struct ConvergenceFailure : std::runtime_error {
  ConvergenceFailure(const std::string& what, Vector best_iterate, double residual)
      : std::runtime_error(what), best_iterate(std::move(best_iterate)), residual(residual) {}
  Vector best_iterate;
  double residual;
};

struct InfeasibleSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Ground sets

/// Finite point set with stable indices. Points are stored as the columns of
/// a d x n matrix; duplicates are rejected.
class PointSet {
 public:
  explicit PointSet(Matrix points, std::vector<std::int64_t> labels = {});
  static PointSet from_rows(const std::vector<Vector>& rows);

  Index size() const { return points_.cols(); }
  Index dim() const { return points_.rows(); }
  auto point(Index i) const { return points_.col(i); }
  const Matrix& points() const { return points_; }
  const std::vector<std::int64_t>& labels() const { return labels_; }

  friend bool operator==(const PointSet& a, const PointSet& b) {
    return a.points_.rows() == b.points_.rows() && a.points_.cols() == b.points_.cols() &&
           a.points_ == b.points_ && a.labels_ == b.labels_;
  }

 private:
  Matrix points_;
  std::vector<std::int64_t> labels_;
};

enum class ShapeKind : std::uint8_t { finite = 0, circle = 1, sphere = 2 };

const char* to_string(ShapeKind kind);

/// Either a finite PointSet or an analytic shape (circle in a 2-plane, or a
/// full (d-1)-sphere) with exact nearest-point projection and a reach value.
class GroundSet {
 public:
  static GroundSet finite(PointSet points, double reach = kInfinity);
  /// Circle of the given radius in the plane spanned by the two orthonormal
  /// columns of `plane_basis` (d x 2), centered at `center`.
  static GroundSet circle(Vector center, double radius, Matrix plane_basis);
  static GroundSet sphere(Vector center, double radius);

  ShapeKind kind() const { return kind_; }
  bool is_finite() const { return kind_ == ShapeKind::finite; }
  Index dim() const;
  double reach() const { return reach_; }

  const PointSet& points() const;
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }
  const Matrix& plane_basis() const { return basis_; }

 private:
  GroundSet() = default;

  ShapeKind kind_ = ShapeKind::finite;
  std::optional<PointSet> points_;
  Vector center_;
  double radius_ = 0.0;
  Matrix basis_;
  double reach_ = kInfinity;
};

// ---------------------------------------------------------------------------
// Budgets and configuration

enum class Variant : std::uint8_t { finite = 0, cover = 1 };

const char* to_string(Variant v);
Variant parse_variant(const std::string& s);

/// Derived tolerances for a target distortion epsilon.
///
/// finite: Pi certified to epsilon/60 on conv(S_X), angle slack epsilon/10.
/// cover:  Pi certified to epsilon/240, an epsilon/40 cover of S_X, and
///         per-direction slack epsilon/30.
struct EpsilonBudget {
  double epsilon = 0.0;
  double hull_distortion_target = 0.0;
  double constraint_slack = 0.0;
  double cover_radius = 0.0;
};

EpsilonBudget make_budget(double epsilon, Variant variant);

/// Slack used when replaying the full angle constraints, for either variant.
inline double angle_slack(const EpsilonBudget& b) { return b.epsilon / 10.0; }

struct SolverConfig {
  double feasibility_tolerance = 1e-9;
  int max_iterations = 100000;
  double radicand_clamp = 1e-9;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

}  // namespace termspace
