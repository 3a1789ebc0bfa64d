#pragma once

// Minimum-norm point of a polyhedron {z : a_i . z <= b_i}, i.e. the Euclidean
// projection of the origin. Hildreth's dual coordinate ascent supplies a warm
// working set; a dual active-set method (Goldfarb-Idnani with identity
// Hessian) then finishes to machine precision and returns KKT multipliers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "termspace/core.hpp"

namespace termspace {

enum class RowProvenance : std::uint8_t { user = 0, finite = 1, cover = 2 };

template <typename Scalar = double>
class ConstraintSystem {
 public:
  using VectorS = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixS = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit ConstraintSystem(Index dim, RowProvenance provenance = RowProvenance::user)
      : dim_(dim), provenance_(provenance), normals_(dim, 0), rhs_(0) {
    if (dim < 1) throw InvalidArgument("ConstraintSystem: dimension must be >= 1");
  }

  void reserve(Index rows) {
    if (rows > normals_.cols()) {
      normals_.conservativeResize(dim_, rows);
      rhs_.conservativeResize(rows);
    }
  }

  /// Appends a_i . z <= b_i. An all-zero a_i is dropped when b_i >= 0 and
  /// rejected as infeasible when b_i < 0. Returns whether the row was kept.
  template <typename Derived>
  bool add_row(const Eigen::MatrixBase<Derived>& a, Scalar b, std::int64_t origin = -1) {
    if (a.size() != dim_) throw InvalidArgument("ConstraintSystem: row dimension mismatch");
    if (!a.allFinite() || !std::isfinite(static_cast<double>(b)))
      throw InvalidArgument("ConstraintSystem: non-finite row");
    if ((a.array() == Scalar(0)).all()) {
      if (b < Scalar(0))
        throw InfeasibleSystem("ConstraintSystem: zero row with negative right-hand side");
      ++dropped_;
      return false;
    }
    if (rows_ == normals_.cols()) reserve(std::max<Index>(8, 2 * rows_));
    normals_.col(rows_) = a;
    rhs_(rows_) = b;
    origins_.push_back(origin);
    ++rows_;
    return true;
  }

  Index dim() const { return dim_; }
  Index rows() const { return rows_; }
  Index dropped() const { return dropped_; }
  RowProvenance provenance() const { return provenance_; }

  /// Row normals as columns (dim x rows).
  auto normals() const { return normals_.leftCols(rows_); }
  auto normal(Index i) const { return normals_.col(i); }
  auto rhs() const { return rhs_.head(rows_); }
  Scalar rhs(Index i) const { return rhs_(i); }
  /// Ground-point or cover-direction index that produced row i (-1 if none).
  std::int64_t origin(Index i) const { return origins_[static_cast<std::size_t>(i)]; }

  /// Residuals a_i . z - b_i (positive means violated).
  VectorS residuals(const VectorS& z) const { return normals().transpose() * z - rhs(); }

 private:
  Index dim_;
  RowProvenance provenance_;
  MatrixS normals_;
  VectorS rhs_;
  std::vector<std::int64_t> origins_;
  Index rows_ = 0;
  Index dropped_ = 0;
};

template <typename Scalar = double>
struct MinNormSolution {
  using VectorS = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  VectorS z;
  std::vector<Index> active_rows;
  /// One multiplier per row; zero off the active set. z = -sum_i mult_i a_i.
  VectorS multipliers;
  int iterations = 0;
  Scalar max_violation = 0;
};

struct KktReport {
  double primal_violation = 0.0;
  double stationarity = 0.0;
  double complementary_slackness = 0.0;
  double min_multiplier = 0.0;
  bool pass = false;
};

namespace detail {

inline constexpr int kWarmStartSweeps = 20;

template <typename Scalar>
class ActiveSet {
 public:
  using VectorS = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixS = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit ActiveSet(const ConstraintSystem<Scalar>& sys) : sys_(sys) {}

  Index size() const { return static_cast<Index>(rows_.size()); }
  const std::vector<Index>& rows() const { return rows_; }
  bool contains(Index i) const { return std::find(rows_.begin(), rows_.end(), i) != rows_.end(); }

  void add(Index i) { rows_.push_back(i); }
  void remove_at(Index k) { rows_.erase(rows_.begin() + k); }

  MatrixS normals() const {
    MatrixS n(sys_.dim(), size());
    for (Index k = 0; k < size(); ++k) n.col(k) = sys_.normal(rows_[static_cast<std::size_t>(k)]);
    return n;
  }

  /// Splits a = N r + d with d orthogonal to span(N).
  void decompose(const VectorS& a, VectorS& r, VectorS& d) const {
    const Index q = size();
    if (q == 0) {
      r.resize(0);
      d = a;
      return;
    }
    const MatrixS n = normals();
    Eigen::HouseholderQR<MatrixS> qr(n);
    VectorS y = qr.householderQ().adjoint() * a;
    r = qr.matrixQR().topLeftCorner(q, q).template triangularView<Eigen::Upper>().solve(y.head(q));
    VectorS tail = VectorS::Zero(a.size());
    tail.tail(a.size() - q) = y.tail(a.size() - q);
    d = qr.householderQ() * tail;
  }

  /// Least-norm solution of a_i . z = b_i over the working set; returns the
  /// multipliers with z = -N mult.
  VectorS equality_multipliers(VectorS& z) const {
    const Index q = size();
    if (q == 0) {
      z.setZero(sys_.dim());
      return VectorS(0);
    }
    const MatrixS n = normals();
    VectorS b(q);
    for (Index k = 0; k < q; ++k) b(k) = sys_.rhs(rows_[static_cast<std::size_t>(k)]);
    Eigen::HouseholderQR<MatrixS> qr(n);
    const auto r = qr.matrixQR().topLeftCorner(q, q).template triangularView<Eigen::Upper>();
    VectorS w = r.transpose().solve(b);  // R^T w = b
    VectorS padded = VectorS::Zero(sys_.dim());
    padded.head(q) = w;
    z = qr.householderQ() * padded;
    return -r.solve(w);
  }

 private:
  const ConstraintSystem<Scalar>& sys_;
  std::vector<Index> rows_;
};

}  // namespace detail

/// Projection of the origin onto {z : a_i . z <= b_i}.
///
/// Throws InfeasibleSystem when the dual is unbounded and ConvergenceFailure
/// when cfg.max_iterations active-set steps do not reach a KKT point.
template <typename Scalar>
MinNormSolution<Scalar> min_norm_point(const ConstraintSystem<Scalar>& sys,
                                       const SolverConfig& cfg) {
  using VectorS = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  cfg.validate();
  const Index m = sys.dim();
  const Index rows = sys.rows();

  MinNormSolution<Scalar> out;
  out.z = VectorS::Zero(m);
  out.multipliers = VectorS::Zero(rows);
  if (rows == 0) return out;

  VectorS norms(rows);
  for (Index i = 0; i < rows; ++i) norms(i) = sys.normal(i).norm();
  const Scalar add_tol = Scalar(1e-3 * cfg.feasibility_tolerance);
  const Scalar dep_tol = Scalar(64) * std::numeric_limits<Scalar>::epsilon();

  // Hildreth sweeps: lambda_i <- max(0, lambda_i + r_i / |a_i|^2), z = -A^T lambda.
  VectorS lambda = VectorS::Zero(rows);
  VectorS z = VectorS::Zero(m);
  const int sweeps = std::min(detail::kWarmStartSweeps, cfg.max_iterations);
  for (int s = 0; s < sweeps; ++s) {
    Scalar moved = 0;
    for (Index i = 0; i < rows; ++i) {
      const Scalar resid = sys.normal(i).dot(z) - sys.rhs(i);
      const Scalar step = std::max(-lambda(i), resid / (norms(i) * norms(i)));
      if (step != Scalar(0)) {
        lambda(i) += step;
        z.noalias() -= step * sys.normal(i);
        moved = std::max(moved, std::abs(step) * norms(i));
      }
    }
    if (moved <= add_tol) break;
  }

  // Seed the working set with linearly independent rows carrying the largest
  // warm-start multipliers.
  detail::ActiveSet<Scalar> active(sys);
  {
    std::vector<Index> order;
    for (Index i = 0; i < rows; ++i)
      if (lambda(i) > Scalar(0)) order.push_back(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return lambda(a) > lambda(b); });
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> basis(m, 0);
    for (Index i : order) {
      if (active.size() == m) break;
      VectorS r = sys.normal(i);
      for (int pass = 0; pass < 2; ++pass) r -= basis * (basis.transpose() * r);
      const Scalar rn = r.norm();
      if (rn > Scalar(1e-8) * norms(i)) {
        basis.conservativeResize(m, basis.cols() + 1);
        basis.col(basis.cols() - 1) = r / rn;
        active.add(i);
      }
    }
  }

  // Restore dual feasibility: drop the most negative multiplier until none remain.
  VectorS mult = active.equality_multipliers(z);
  for (;;) {
    Index worst = -1;
    for (Index k = 0; k < active.size(); ++k)
      if (mult(k) < Scalar(0) && (worst < 0 || mult(k) < mult(worst))) worst = k;
    if (worst < 0) break;
    active.remove_at(worst);
    mult = active.equality_multipliers(z);
  }

  int iterations = 0;
  for (;;) {
    // Most violated row (distance to its hyperplane), lowest index on ties.
    Index p = -1;
    Scalar worst = add_tol;
    for (Index i = 0; i < rows; ++i) {
      const Scalar v = (sys.normal(i).dot(z) - sys.rhs(i)) / norms(i);
      if (v > worst && !active.contains(i)) {
        worst = v;
        p = i;
      }
    }
    if (p < 0) break;

    const VectorS ap = sys.normal(p);
    Scalar mult_p = 0;
    for (;;) {
      if (++iterations > cfg.max_iterations) {
        const VectorS resid = sys.residuals(z);
        throw ConvergenceFailure("min_norm_point: iteration budget exhausted", z.template cast<double>(),
                                 static_cast<double>(resid.maxCoeff()));
      }
      VectorS r, d;
      active.decompose(ap, r, d);

      Scalar t1 = std::numeric_limits<Scalar>::infinity();
      Index drop = -1;
      for (Index k = 0; k < r.size(); ++k) {
        if (r(k) > Scalar(0)) {
          const Scalar t = mult(k) / r(k);
          if (t < t1) {
            t1 = t;
            drop = k;
          }
        }
      }

      const Scalar dn = d.norm();
      const bool dependent = dn <= dep_tol * norms(p);
      Scalar t2 = std::numeric_limits<Scalar>::infinity();
      if (!dependent) t2 = (ap.dot(z) - sys.rhs(p)) / (dn * dn);

      if (dependent && drop < 0)
        throw InfeasibleSystem("min_norm_point: constraints are inconsistent (row " +
                               std::to_string(p) + ")");

      const Scalar t = std::min(t1, t2);
      if (!dependent) z.noalias() -= t * d;
      if (r.size() > 0) mult.noalias() -= t * r;
      mult_p += t;

      if (t2 <= t1) {
        active.add(p);
        mult.conservativeResize(mult.size() + 1);
        mult(mult.size() - 1) = mult_p;
        break;
      }
      active.remove_at(drop);
      for (Index k = drop; k + 1 < mult.size(); ++k) mult(k) = mult(k + 1);
      mult.conservativeResize(mult.size() - 1);
    }
  }

  // Re-solve on the final working set so active rows hold to rounding.
  {
    VectorS polished;
    VectorS pm = active.equality_multipliers(polished);
    const Scalar scale = pm.size() ? pm.cwiseAbs().maxCoeff() : Scalar(0);
    const Scalar neg_tol = Scalar(1e-10) * std::max(Scalar(1), scale);
    const Scalar before = sys.residuals(z).maxCoeff();
    const Scalar after = sys.residuals(polished).maxCoeff();
    if ((pm.size() == 0 || pm.minCoeff() >= -neg_tol) &&
        after <= std::max(before, Scalar(cfg.feasibility_tolerance) * Scalar(1e-3))) {
      z = polished;
      mult = pm.cwiseMax(Scalar(0));
    }
  }

  out.z = z;
  out.iterations = iterations;
  out.active_rows = active.rows();
  for (Index k = 0; k < active.size(); ++k)
    out.multipliers(active.rows()[static_cast<std::size_t>(k)]) = mult(k);
  out.max_violation = std::max(Scalar(0), sys.residuals(z).maxCoeff());
  if (out.max_violation > Scalar(cfg.feasibility_tolerance))
    throw ConvergenceFailure("min_norm_point: final iterate violates constraints",
                             z.template cast<double>(), static_cast<double>(out.max_violation));
  return out;
}

/// Recomputes primal feasibility, stationarity |z + sum lambda_i a_i| and
/// complementary slackness for a solution. Passing requires all three (and
/// multiplier negativity) within 10x the feasibility tolerance.
template <typename Scalar>
KktReport check_kkt(const ConstraintSystem<Scalar>& sys, const MinNormSolution<Scalar>& sol,
                    const SolverConfig& cfg = {}) {
  using VectorS = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  KktReport rep;
  const double limit = 10.0 * cfg.feasibility_tolerance;
  if (sys.rows() == 0) {
    rep.stationarity = static_cast<double>(sol.z.norm());
    rep.pass = rep.stationarity <= limit;
    return rep;
  }
  const VectorS resid = sys.residuals(sol.z);
  rep.primal_violation = std::max(0.0, static_cast<double>(resid.maxCoeff()));
  rep.stationarity = static_cast<double>((sol.z + sys.normals() * sol.multipliers).norm());
  rep.complementary_slackness =
      static_cast<double>(sol.multipliers.cwiseProduct(resid).cwiseAbs().maxCoeff());
  rep.min_multiplier = static_cast<double>(sol.multipliers.minCoeff());
  rep.pass = rep.primal_violation <= limit && rep.stationarity <= limit &&
             rep.complementary_slackness <= limit && rep.min_multiplier >= -limit;
  return rep;
}

}  // namespace termspace
