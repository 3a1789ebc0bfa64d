#pragma once

#include <cstdint>
#include <functional>

#include "termspace/core.hpp"

namespace termspace {

/// Symmetric set of unit directions (columns), w in S implies -w in S.
struct SecantSet {
  enum class Source : std::uint8_t { exact_finite = 0, sampled = 1 };

  Matrix directions;  // d x k
  Source source = Source::exact_finite;

  Index size() const { return directions.cols(); }
  Index dim() const { return directions.rows(); }
};

/// Linear map R^d -> R^m.
struct ProjectionMatrix {
  Matrix entries;  // m x d
  /// Largest |‖Πx‖ − ‖x‖| found over conv(S); -1 until certified.
  double distortion_estimate = -1.0;
  std::uint64_t seed = 0;

  Index rows() const { return entries.rows(); }
  Index cols() const { return entries.cols(); }
  Vector apply(const Vector& x) const { return entries * x; }
};

inline constexpr double kSecantDedupTolerance = 1e-12;

/// All normalized differences (x - y)/|x - y| over distinct pairs, deduplicated
/// within kSecantDedupTolerance. Output order is (v1, -v1, v2, -v2, ...).
SecantSet unit_secants(const PointSet& x);

/// `samples` independent pairs drawn uniformly on an analytic ground set, each
/// contributing its normalized difference and its negation.
SecantSet sampled_secants(const GroundSet& g, int samples, std::uint64_t seed);

/// I.i.d. N(0, 1/m) entries, so E|Πx|^2 = |x|^2.
ProjectionMatrix gaussian_matrix(Index m, Index d, std::uint64_t seed);

/// Random partial isometry: orthonormal columns when m >= d (an exact
/// isometry), orthonormal rows scaled by sqrt(d/m) when m < d.
ProjectionMatrix orthonormal_matrix(Index m, Index d, std::uint64_t seed);

using ProjectionFactory = std::function<ProjectionMatrix(Index m)>;

/// Gaussian projections; once m >= d the factory switches to the random
/// isometry drawn from the same seed unless `isometric_fallback` is false.
ProjectionFactory gaussian_factory(Index d, std::uint64_t seed, bool isometric_fallback = true);

struct HullProbeOptions {
  int probes = 0;         // total probes; 0 means |S| + 512
  int ascent_steps = 40;
  std::uint64_t seed = 0;
  /// Stop early once an estimate above this value is found.
  double stop_above = kInfinity;
};

struct HullDistortionEstimate {
  double value = 0.0;
  Vector witness;  // point of conv(S) attaining `value`
};

/// Lower bound on sup over conv(S) of | |Πx| - |x| |. Probes every vertex,
/// then random Dirichlet combinations over supports of size min(|S|, d+1),
/// each refined by projected-gradient ascent on the weight simplex. Random
/// probe j draws from its own substream, so a larger budget only adds probes.
HullDistortionEstimate estimate_hull_distortion_detailed(const ProjectionMatrix& pi,
                                                         const SecantSet& s,
                                                         const HullProbeOptions& opts);

double estimate_hull_distortion(const ProjectionMatrix& pi, const SecantSet& s, int probes,
                                int ascent_steps, std::uint64_t seed);

/// Tries m = m0, 2 m0, 4 m0, ... <= m_cap and returns the first projection whose
/// estimate is <= target, with the estimate recorded. Throws
/// CertificationFailure carrying the best (m, estimate) otherwise.
ProjectionMatrix certify_or_grow(const ProjectionFactory& factory, const SecantSet& s,
                                 double target, Index m0, Index m_cap,
                                 HullProbeOptions opts = {});

struct WidthEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Monte Carlo estimate of E sup_{x in S} <g, x>.
WidthEstimate gaussian_width_mc(const SecantSet& s, int trials, std::uint64_t seed);

/// Volume of the unit ball in R^d, pi^{d/2} / Gamma(d/2 + 1).
double unit_ball_volume(int d);

struct ManifoldWidthBound {
  double alpha = 0.0;
  double beta = 0.0;
  double bound = 0.0;
};

/// Upper bound on the Gaussian width of the unit secants of a compact d-dim
/// submanifold with reach tau, volume vol and boundary volume bvol.
/// Evaluated in log space so large d does not overflow the bound; alpha and
/// beta themselves may be +inf in that regime.
ManifoldWidthBound manifold_width_bound(int d, double tau, double vol, double bvol);

}  // namespace termspace
