#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "termspace/core.hpp"

namespace termspace {

/// splitmix64 finalizer; used to derive independent substreams from a seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(mix_seed(seed, stream));
}

inline Eigen::VectorXd standard_normal(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = normal(rng);
  return g;
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Uniform sample from a ground set: a uniformly chosen point for finite
/// sets, the uniform (arc-length / surface) measure for circles and spheres.
Eigen::VectorXd sample_ground_point(const GroundSet& g, Rng& rng);

}  // namespace termspace
