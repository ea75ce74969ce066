#pragma once

#include <cstdint>
#include <random>

#include "gwd/measures.hpp"
#include "gwd/oracle.hpp"

namespace gwd {

/// Deterministic source of random test instances. Every draw flows from the
/// seed given at construction.
class InstanceGenerator {
public:
  explicit InstanceGenerator(std::uint64_t seed) : rng_(seed) {}

  /// mean + amplitude * g, where g is a random cosine series with zero
  /// reference-weighted mean scaled so that max |g| = 1. The total mass is
  /// therefore mean * gamma(box) and the density range is within
  /// [mean - amplitude, mean + amplitude].
  GridMeasure smooth_density(const ReferenceMeasure& reference, double mean, double amplitude, int modes = 4);

  /// Independent uniform draws in [lo, hi] per cell.
  GridMeasure rough_density(const ReferenceMeasure& reference, double lo, double hi);

  /// Two-cell instance with reference weights in [0.5, 1.5] and all four
  /// densities inside [margin, 1 - margin] for the quadratic mobility.
  TwoCellInstance two_cell(int time_steps = 8, double margin = 0.05);

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::mt19937_64& engine() { return rng_; }

private:
  std::mt19937_64 rng_;
};

}  // namespace gwd
