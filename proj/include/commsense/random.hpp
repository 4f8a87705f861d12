#pragma once

#include <cstdint>
#include <random>

#include "commsense/types.hpp"

namespace commsense {

/// Seeded generator with a fixed, documented seed-to-stream mapping.
///
/// The engine is std::mt19937_64, whose output sequence is fully specified by the
/// C++ standard. Derived values are produced here rather than through the
/// implementation-defined std::*_distribution classes:
///
///   uniform()  = (next() >> 11) * 2^-53                     in [0, 1)
///   bit()      = next() >> 63
///   normal()   = Box-Muller on (u1, u2) = (1 - uniform(), uniform()),
///                cosine branch first, sine branch cached for the next call
///   complex_normal(v) = sqrt(v/2) * (normal() + j normal())
///
/// Streams are therefore identical across compilers and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  std::uint8_t bit() { return static_cast<std::uint8_t>(next() >> 63); }
  double normal();
  /// Circular complex Gaussian with E|z|^2 = variance.
  cplx complex_normal(double variance);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive independent sub-seeds from one user seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace commsense
