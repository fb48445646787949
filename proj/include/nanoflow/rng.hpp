#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace nanoflow {

/// Mixes a run seed with a stream id into an independent 64-bit seed
/// (splitmix64 finalizer). Used to give every device, event and run its own
/// reproducible substream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded random stream. The engine output is fixed by the standard; the
/// distributions are implemented here so results do not depend on the
/// standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be > 0.
  std::size_t index(std::size_t n);
  /// Standard normal deviate (Marsaglia polar method).
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nanoflow
