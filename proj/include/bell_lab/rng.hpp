#pragma once

#include <cstdint>
#include <random>

#include "bell_lab/angles.hpp"

namespace bell_lab {

/// One SplitMix64 step. Used to decorrelate derived stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for substream `stream_index` of a master seed. Distinct indices give
/// statistically independent mt19937_64 streams.
inline std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                        std::uint64_t stream_index) {
  std::uint64_t state = master_seed ^ (0xd1b54a32d192ed03ULL * (stream_index + 1));
  splitmix64(state);
  return splitmix64(state);
}

/// Seeded uniform random stream.
///
/// Draws are produced from raw mt19937_64 output rather than
/// std::uniform_real_distribution, whose results are implementation-defined;
/// reports must be bit-reproducible across toolchains.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [0, 2*pi).
  double uniform_angle() { return uniform01() * kTwoPi; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bell_lab
