#pragma once

// Portable random helpers. The standard <random> distributions are
// implementation-defined, so everything that feeds a schedule or a golden
// file is derived from raw std::mt19937_64 output here.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace asyncmetro::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and a key.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t key) {
  return splitmix64(splitmix64(master) ^ splitmix64(key + 0x632BE59BD9B4E019ULL));
}

/// Uniform on [0,1) with 53 random bits.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform on the open interval (0,1).
inline double uniform_open01(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

/// Exp(1) variate, strictly positive.
inline double exponential1(std::mt19937_64& gen) {
  return -std::log(uniform_open01(gen));
}

/// Inverse-CDF draw from a probability vector. Zero-mass entries are never
/// returned.
inline std::uint32_t categorical(std::mt19937_64& gen, std::span<const double> probs) {
  const double u = uniform01(gen);
  double acc = 0.0;
  std::uint32_t last_positive = 0;
  for (std::uint32_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    last_positive = k;
    acc += probs[k];
    if (u < acc) return k;
  }
  return last_positive;
}

/// Uniform integer in [0, bound) by rejection.
inline std::uint64_t below(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = gen();
  } while (x >= limit);
  return x % bound;
}

}  // namespace asyncmetro::rng
