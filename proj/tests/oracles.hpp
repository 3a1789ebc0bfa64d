#pragma once

// Independent reference computations used only by the test suites. None of
// these share code paths with the library routines they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Random feasible system: rows x m normals, rhs chosen so a random point is
/// strictly feasible. A is rows-by-m (one constraint per row).
struct RandomSystem {
  Mat A;
  Vec b;
};

inline RandomSystem random_feasible_system(std::mt19937_64& rng, int m, int rows) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomSystem s{Mat(rows, m), Vec(rows)};
  Vec z0(m);
  for (int j = 0; j < m; ++j) z0(j) = 2.0 * n(rng);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < m; ++j) s.A(i, j) = n(rng);
    s.b(i) = s.A.row(i).dot(z0) + u(rng);
  }
  return s;
}

/// Exact min-norm point by enumerating every subset of rows: the optimum is
/// the least-norm solution of some active subsystem, and every feasible
/// candidate is an upper bound on its norm.
inline Vec enumerate_min_norm(const Mat& A, const Vec& b) {
  const int rows = static_cast<int>(A.rows());
  const int m = static_cast<int>(A.cols());
  auto feasible = [&](const Vec& z) { return ((A * z - b).array() <= 1e-10).all(); };
  Vec best = Vec::Zero(m);
  double best_norm = feasible(best) ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << rows); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < rows; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    Mat Aw(idx.size(), m);
    Vec bw(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      Aw.row(k) = A.row(idx[k]);
      bw(k) = b(idx[k]);
    }
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(Aw);
    Vec z = cod.solve(bw);
    if ((Aw * z - bw).norm() > 1e-9) continue;  // inconsistent subsystem
    if (feasible(z) && z.norm() < best_norm) {
      best_norm = z.norm();
      best = z;
    }
  }
  return best;
}

/// Min-norm point from accelerated projected gradient on the dual
/// max_{lambda >= 0} -1/2 |A^T lambda|^2 - b^T lambda, with z = -A^T lambda.
inline Vec projected_gradient_min_norm(const Mat& A, const Vec& b, int max_iter = 10000000,
                                       double tol = 1e-14) {
  const Mat G = A * A.transpose();
  const double L = std::max(1e-12, Eigen::SelfAdjointEigenSolver<Mat>(G).eigenvalues().maxCoeff());
  Vec lam = Vec::Zero(A.rows());
  Vec y = lam;
  double t = 1.0;
  Vec z_prev = Vec::Zero(A.cols());
  for (int k = 0; k < max_iter; ++k) {
    // gradient of 1/2 lam^T G lam + b^T lam
    const Vec grad = G * y + b;
    Vec next = (y - grad / L).cwiseMax(0.0);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // restart when momentum stops helping
    if ((next - lam).dot(y - next) > 0.0) {
      y = lam;
      t = 1.0;
      continue;
    }
    y = next + ((t - 1.0) / t_next) * (next - lam);
    lam = next;
    t = t_next;
    if (k % 64 == 0) {
      const Vec z = -A.transpose() * lam;
      if ((z - z_prev).norm() < tol && ((A * z - b).array() <= 1e-12).all()) return z;
      z_prev = z;
    }
  }
  return -A.transpose() * lam;
}

/// Brute-force lower bound on sup_{x in conv(S)} | |Pi x| - |x| | by sampling
/// `samples` convex combinations with random support size up to max_support.
inline double dirichlet_scan(const Mat& Pi, const Mat& S, int samples, int max_support,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> ex(1.0);
  const int k = static_cast<int>(S.cols());
  std::vector<int> idx(k);
  double best = 0.0;
  for (int j = 0; j < k; ++j) best = std::max(best, std::abs((Pi * S.col(j)).norm() - S.col(j).norm()));
  for (int s = 0; s < samples; ++s) {
    const int support = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::min(k, max_support)));
    for (int j = 0; j < k; ++j) idx[j] = j;
    for (int j = 0; j < support; ++j) std::swap(idx[j], idx[j + rng() % (k - j)]);
    Vec x = Vec::Zero(S.rows());
    double total = 0.0;
    for (int j = 0; j < support; ++j) {
      const double w = ex(rng);
      total += w;
      x += w * S.col(idx[j]);
    }
    x /= total;
    best = std::max(best, std::abs((Pi * x).norm() - x.norm()));
  }
  return best;
}

/// Nearest column of X to u by linear scan (lowest index among exact ties).
inline Eigen::Index linear_nearest(const Mat& X, const Vec& u) {
  Eigen::Index best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double d = (X.col(j) - u).norm();
    if (d < bd) {
      bd = d;
      best = j;
    }
  }
  return best;
}

}  // namespace oracle
