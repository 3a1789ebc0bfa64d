#include "termspace/randproj.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/QR>

#include "termspace/parallel.hpp"
#include "termspace/random.hpp"

namespace termspace {

namespace {

// Fixed directions used to orient and bucket secants during deduplication.
Vector fixed_direction(Index d, std::uint64_t salt) {
  Rng rng = make_rng(0x5ec0a17ull, salt);
  Vector r = standard_normal(rng, d);
  return r / r.norm();
}

// Keeps the first occurrence of each direction up to sign, then emits every
// survivor followed by its negation.
SecantSet symmetrize_dedup(const std::vector<Vector>& raw, SecantSet::Source source) {
  SecantSet out;
  out.source = source;
  if (raw.empty()) return out;
  const Index d = raw.front().size();
  const Vector orient = fixed_direction(d, 1);
  const Vector bucket = fixed_direction(d, 2);

  const std::size_t k = raw.size();
  std::vector<Vector> canon(k);
  std::vector<double> key(k);
  for (std::size_t i = 0; i < k; ++i) {
    canon[i] = raw[i].dot(orient) >= 0.0 ? raw[i] : Vector(-raw[i]);
    key[i] = canon[i].dot(bucket);
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  std::vector<std::size_t> pos(k);
  for (std::size_t p = 0; p < k; ++p) pos[order[p]] = p;

  // |key_a - key_b| <= |c_a - c_b|, so duplicates sit within a key window.
  std::vector<char> dup(k, 0);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < k; ++i) {
    auto is_dup_of = [&](std::size_t j) {
      return j < i && !dup[j] && (canon[i] - canon[j]).norm() <= kSecantDedupTolerance;
    };
    for (std::size_t p = pos[i]; p-- > 0 && key[i] - key[order[p]] <= kSecantDedupTolerance;)
      if (is_dup_of(order[p])) {
        dup[i] = 1;
        break;
      }
    if (!dup[i])
      for (std::size_t p = pos[i] + 1; p < k && key[order[p]] - key[i] <= kSecantDedupTolerance; ++p)
        if (is_dup_of(order[p])) {
          dup[i] = 1;
          break;
        }
    if (!dup[i]) kept.push_back(i);
  }

  out.directions.resize(d, static_cast<Index>(2 * kept.size()));
  for (std::size_t t = 0; t < kept.size(); ++t) {
    out.directions.col(static_cast<Index>(2 * t)) = raw[kept[t]];
    out.directions.col(static_cast<Index>(2 * t + 1)) = -raw[kept[t]];
  }
  return out;
}

// Euclidean projection onto the probability simplex.
void project_simplex(Vector& w) {
  Vector s = w;
  std::sort(s.data(), s.data() + s.size(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    cum += s(i);
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (s(i) - t > 0.0) theta = t;
  }
  w = (w.array() - theta).cwiseMax(0.0);
}

struct ProbeResult {
  double value = -1.0;
  Vector witness;
};

// One random probe: Dirichlet weights on a random support, then projected
// gradient ascent of | |Q w| - |V w| | on the simplex.
ProbeResult run_probe(const Matrix& images, const Matrix& dirs, Index support, int steps,
                      std::uint64_t seed, std::uint64_t probe) {
  Rng rng = make_rng(seed, probe);
  const Index k = dirs.cols();
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(support));
  std::uniform_int_distribution<Index> pick(0, k - 1);
  while (static_cast<Index>(idx.size()) < support) {
    const Index c = pick(rng);
    if (std::find(idx.begin(), idx.end(), c) == idx.end()) idx.push_back(c);
  }
  Matrix V(dirs.rows(), support), Q(images.rows(), support);
  for (Index t = 0; t < support; ++t) {
    V.col(t) = dirs.col(idx[static_cast<std::size_t>(t)]);
    Q.col(t) = images.col(idx[static_cast<std::size_t>(t)]);
  }
  std::exponential_distribution<double> expo(1.0);
  Vector w(support);
  for (Index t = 0; t < support; ++t) w(t) = expo(rng);
  w /= w.sum();

  auto objective = [&](const Vector& weights, Vector* grad) {
    const Vector qx = Q * weights;
    const Vector vx = V * weights;
    const double qn = qx.norm(), vn = vx.norm();
    const double phi = qn - vn;
    if (grad) {
      grad->setZero(support);
      if (qn > 0.0) *grad += Q.transpose() * qx / qn;
      if (vn > 0.0) *grad -= V.transpose() * vx / vn;
      if (phi < 0.0) *grad = -*grad;
    }
    return std::abs(phi);
  };

  Vector grad(support);
  double value = objective(w, &grad);
  double eta = 1.0;
  for (int s = 0; s < steps; ++s) {
    Vector trial = w + eta * grad;
    project_simplex(trial);
    Vector trial_grad(support);
    const double tv = objective(trial, &trial_grad);
    if (tv > value) {
      w = trial;
      value = tv;
      grad = trial_grad;
      eta *= 1.5;
    } else {
      eta *= 0.5;
      if (eta < 1e-12) break;
    }
  }
  return {value, V * w};
}

}  // namespace

SecantSet unit_secants(const PointSet& x) {
  const Index n = x.size();
  if (n < 2) throw InvalidArgument("unit_secants: need at least two points");
  std::vector<Vector> raw;
  raw.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      Vector v = x.point(j) - x.point(i);
      raw.push_back(v / v.norm());
    }
  return symmetrize_dedup(raw, SecantSet::Source::exact_finite);
}

SecantSet sampled_secants(const GroundSet& g, int samples, std::uint64_t seed) {
  if (g.is_finite()) throw InvalidArgument("sampled_secants: use unit_secants for finite sets");
  if (samples < 2) throw InvalidArgument("sampled_secants: need at least two samples");
  Rng rng = make_rng(seed);
  std::vector<Vector> raw;
  raw.reserve(static_cast<std::size_t>(samples));
  while (static_cast<int>(raw.size()) < samples) {
    const Vector a = sample_ground_point(g, rng);
    const Vector b = sample_ground_point(g, rng);
    const Vector v = b - a;
    const double n = v.norm();
    if (n > 1e-9 * g.radius()) raw.push_back(v / n);
  }
  return symmetrize_dedup(raw, SecantSet::Source::sampled);
}

ProjectionMatrix gaussian_matrix(Index m, Index d, std::uint64_t seed) {
  if (m < 1 || d < 1) throw InvalidArgument("gaussian_matrix: m and d must be >= 1");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  ProjectionMatrix p;
  p.entries.resize(m, d);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < d; ++j) p.entries(i, j) = normal(rng);
  p.seed = seed;
  return p;
}

ProjectionMatrix orthonormal_matrix(Index m, Index d, std::uint64_t seed) {
  ProjectionMatrix g = gaussian_matrix(m, d, seed);
  const bool tall = m >= d;
  const Matrix a = tall ? g.entries : Matrix(g.entries.transpose());
  const Index r = std::min(m, d);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), r);
  // Fix column signs by diag(R) so the draw is Haar distributed.
  for (Index j = 0; j < r; ++j)
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) = -q.col(j);
  ProjectionMatrix p;
  p.seed = seed;
  if (tall)
    p.entries = q;
  else
    p.entries = std::sqrt(static_cast<double>(d) / static_cast<double>(m)) * q.transpose();
  return p;
}

ProjectionFactory gaussian_factory(Index d, std::uint64_t seed, bool isometric_fallback) {
  return [d, seed, isometric_fallback](Index m) {
    const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(m));
    return (isometric_fallback && m >= d) ? orthonormal_matrix(m, d, s) : gaussian_matrix(m, d, s);
  };
}

HullDistortionEstimate estimate_hull_distortion_detailed(const ProjectionMatrix& pi,
                                                         const SecantSet& s,
                                                         const HullProbeOptions& opts) {
  const Index k = s.size();
  if (k == 0) throw InvalidArgument("estimate_hull_distortion: empty secant set");
  if (pi.cols() != s.dim()) throw InvalidArgument("estimate_hull_distortion: dimension mismatch");
  const long long probes = opts.probes == 0 ? k + 512 : opts.probes;
  if (probes < k) throw InvalidArgument("estimate_hull_distortion: probes must be >= |S|");
  if (opts.ascent_steps < 0) throw InvalidArgument("estimate_hull_distortion: negative ascent steps");

  const Matrix images = pi.entries * s.directions;
  HullDistortionEstimate best{-1.0, Vector()};
  for (Index j = 0; j < k; ++j) {
    const double v = std::abs(images.col(j).norm() - s.directions.col(j).norm());
    if (v > best.value) {
      best.value = v;
      best.witness = s.directions.col(j);
    }
  }
  if (best.value > opts.stop_above) return best;

  const Index support = std::min<Index>(k, s.dim() + 1);
  const long long random = probes - k;
  constexpr long long kBlock = 32;
  constexpr long long kWave = 16;  // blocks evaluated between early-stop checks
  const long long blocks = (random + kBlock - 1) / kBlock;
  for (long long wave = 0; wave < blocks; wave += kWave) {
    const long long nb = std::min(kWave, blocks - wave);
    std::vector<ProbeResult> local(static_cast<std::size_t>(nb));
    parallel_for(static_cast<std::size_t>(nb), [&](std::size_t b) {
      const long long lo = (wave + static_cast<long long>(b)) * kBlock;
      const long long hi = std::min(random, lo + kBlock);
      ProbeResult r;
      for (long long p = lo; p < hi; ++p) {
        ProbeResult q = run_probe(images, s.directions, support, opts.ascent_steps, opts.seed,
                                  static_cast<std::uint64_t>(p));
        if (q.value > r.value) r = std::move(q);
      }
      local[b] = std::move(r);
    });
    for (auto& r : local)
      if (r.value > best.value) {
        best.value = r.value;
        best.witness = std::move(r.witness);
      }
    if (best.value > opts.stop_above) break;
  }
  return best;
}

double estimate_hull_distortion(const ProjectionMatrix& pi, const SecantSet& s, int probes,
                                int ascent_steps, std::uint64_t seed) {
  HullProbeOptions o;
  o.probes = probes;
  o.ascent_steps = ascent_steps;
  o.seed = seed;
  if (probes == 0) throw InvalidArgument("estimate_hull_distortion: probes must be >= |S|");
  return estimate_hull_distortion_detailed(pi, s, o).value;
}

ProjectionMatrix certify_or_grow(const ProjectionFactory& factory, const SecantSet& s,
                                 double target, Index m0, Index m_cap, HullProbeOptions opts) {
  if (!(target >= 0.0 && target < 1.0))
    throw InvalidArgument("certify_or_grow: target must lie in [0,1)");
  if (m0 < 1) throw InvalidArgument("certify_or_grow: m0 must be >= 1");
  if (m_cap < m0) throw InvalidArgument("certify_or_grow: m_cap must be >= m0");
  opts.stop_above = target;
  int best_m = -1;
  double best_est = kInfinity;
  for (Index m = m0; m <= m_cap; m *= 2) {
    ProjectionMatrix p = factory(m);
    const double est = estimate_hull_distortion_detailed(p, s, opts).value;
    if (est <= target) {
      p.distortion_estimate = est;
      return p;
    }
    if (est < best_est) {
      best_est = est;
      best_m = static_cast<int>(m);
    }
  }
  throw CertificationFailure("certify_or_grow: no m <= " + std::to_string(m_cap) +
                                 " reached hull distortion " + std::to_string(target) +
                                 " (best m=" + std::to_string(best_m) +
                                 ", estimate=" + std::to_string(best_est) + ")",
                             best_m, best_est);
}

WidthEstimate gaussian_width_mc(const SecantSet& s, int trials, std::uint64_t seed) {
  if (s.size() == 0) throw InvalidArgument("gaussian_width_mc: empty set");
  if (trials < 2) throw InvalidArgument("gaussian_width_mc: need at least two trials");
  constexpr int kChunk = 2048;
  const int chunks = (trials + kChunk - 1) / kChunk;
  std::vector<double> sup(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    const int lo = static_cast<int>(c) * kChunk;
    const int n = std::min(kChunk, trials - lo);
    Rng rng = make_rng(seed, c);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(s.dim(), n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < s.dim(); ++i) g(i, j) = normal(rng);
    const Matrix dots = s.directions.transpose() * g;
    for (int j = 0; j < n; ++j) sup[static_cast<std::size_t>(lo + j)] = dots.col(j).maxCoeff();
  });
  double mean = 0.0;
  for (double v : sup) mean += v;
  mean /= trials;
  double var = 0.0;
  for (double v : sup) var += (v - mean) * (v - mean);
  var /= (trials - 1);
  return {mean, std::sqrt(var / trials)};
}

double unit_ball_volume(int d) {
  if (d < 0) throw InvalidArgument("unit_ball_volume: negative dimension");
  const double h = 0.5 * d;
  return std::exp(h * std::log(M_PI) - std::lgamma(h + 1.0));
}

ManifoldWidthBound manifold_width_bound(int d, double tau, double vol, double bvol) {
  if (d < 1) throw InvalidArgument("manifold_width_bound: d must be >= 1");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("manifold_width_bound: tau must be > 0");
  if (!(vol > 0.0) || !std::isfinite(vol)) throw InvalidArgument("manifold_width_bound: vol must be > 0");
  if (!(bvol >= 0.0) || !std::isfinite(bvol)) throw InvalidArgument("manifold_width_bound: bvol must be >= 0");

  auto logaddexp = [](double a, double b) {
    if (a == -kInfinity) return b;
    if (b == -kInfinity) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
  };

  ManifoldWidthBound out;
  double log_alpha;
  if (d == 1) {
    out.alpha = 20.0 * vol / tau + bvol;
    log_alpha = std::log(out.alpha);
  } else {
    const double lw_d = 0.5 * d * std::log(M_PI) - std::lgamma(0.5 * d + 1.0);
    const double lw_d1 = 0.5 * (d - 1) * std::log(M_PI) - std::lgamma(0.5 * (d - 1) + 1.0);
    const double t1 = std::log(vol) - lw_d + d * std::log(41.0 / tau);
    const double t2 = bvol > 0.0 ? std::log(bvol) - lw_d1 + (d - 1) * std::log(81.0 / tau) : -kInfinity;
    log_alpha = logaddexp(t1, t2);
    out.alpha = std::exp(log_alpha);
  }
  const double log3d = d * std::log(3.0);
  const double log_beta = log_alpha + logaddexp(log_alpha, log3d);
  out.beta = (d == 1) ? out.alpha * out.alpha + 3.0 * out.alpha : std::exp(log_beta);
  const double radicand = (d == 1 ? std::log(out.beta) : log_beta) + 4.0 * d;
  if (!(radicand >= 0.0)) throw InvalidArgument("manifold_width_bound: log(beta) + 4d is negative");
  out.bound = 8.0 * std::sqrt(2.0) * std::sqrt(radicand);
  return out;
}

}  // namespace termspace
