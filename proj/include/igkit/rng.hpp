#pragma once

#include <cstdint>
#include <random>

#include "igkit/tensor.hpp"

namespace igkit {

/// Seeded generator with platform-independent output. The engine sequence is
/// fixed by the standard; the distributions here are implemented locally so
/// results do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n), unbiased.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Box-Muller).
  double normal();

  Tensor normal(Shape shape, double stddev = 1.0);
  Tensor uniform(Shape shape, double lo, double hi);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace igkit
