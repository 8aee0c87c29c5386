#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace csgame {

/// Selects the serial reference loop or the OpenMP loop of a kernel. Both
/// produce bit-identical results; the serial path is kept for testing.
enum class Exec { kSerial, kParallel };

/// Number of OpenMP threads available (1 without OpenMP).
int max_threads();

/// Pairwise (cascade) summation. The association order depends only on the
/// length of the input, so results do not depend on how the terms were
/// produced.
double pairwise_sum(std::span<const double> v);

/// SplitMix64 finaliser; used to derive independent per-path seeds from
/// (seed, counter) pairs.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(splitmix64(seed) ^ splitmix64(counter + 0x632BE59BD9B4E019ULL));
}

}  // namespace csgame
