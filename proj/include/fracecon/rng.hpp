#pragma once

#include <cstdint>
#include <random>

namespace fracecon {

/// Seedable normal generator with a fixed, platform-independent bit stream.
///
/// The engine is std::mt19937_64 (its output sequence is fixed by the C++
/// standard) initialised from a SplitMix64 scramble of the 64-bit seed, so
/// nearby seeds give unrelated streams. Uniforms take the top 53 bits of one
/// engine draw. Standard normals use the Marsaglia polar method; the second
/// variate of each accepted pair is cached. std::normal_distribution is not
/// used because its algorithm is implementation-defined.
class NormalRng {
 public:
  explicit NormalRng(std::uint64_t seed);

  /// Uniform on [0, 1).
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace fracecon
