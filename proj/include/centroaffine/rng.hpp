#pragma once

#include <cstdint>

namespace centroaffine {

/// Deterministic random stream (xoshiro256++ seeded by splitmix64).
/// Self-contained so that seeded runs are byte-identical across platforms;
/// standard-library distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();  ///< in [0, 1)
  double uniform(double lo, double hi);
  double normal();   ///< standard normal via Box-Muller

  /// Independent stream derived from the original seed and a salt; stable
  /// under reordering of draws on the parent.
  Rng fork(std::uint64_t salt) const;

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace centroaffine
