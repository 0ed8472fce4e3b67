#pragma once

// Counter-based randomness. Every random draw in the library is a pure
// function of (seed, stream, counters...), so results never depend on
// iteration order or thread scheduling.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace avakit::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream tags keep draws of different operations independent under one seed.
enum class Stream : std::uint64_t {
  kSubsample = 1,
  kJitter = 2,
  kSynthInstance = 3,
  kSynthDetection = 4,
  kSynthFalsePositive = 5,
  kTemporalJitter = 6,
  kEpoch = 7,
};

constexpr std::uint64_t hash(std::uint64_t seed, Stream stream,
                             std::initializer_list<std::uint64_t> counters) noexcept {
  std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
  for (std::uint64_t c : counters) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

/// Maps 64 random bits to a double on the 2^-53 grid in [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

constexpr double uniform(std::uint64_t seed, Stream stream,
                         std::initializer_list<std::uint64_t> counters) noexcept {
  return to_unit(hash(seed, stream, counters));
}

/// Small sequential generator for draws within one keyed unit of work.
class Sequence {
 public:
  explicit constexpr Sequence(std::uint64_t key) noexcept : state_(key) {}

  constexpr std::uint64_t next_bits() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64(state_);
  }

  constexpr double uniform() noexcept { return to_unit(next_bits()); }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Box-Muller; implemented here so output is identical across standard libraries.
  double normal(double mean, double sd) noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Knuth's multiplication method; intended for small means.
  std::uint64_t poisson(double mean) noexcept {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = uniform();
    while (p > limit) {
      ++k;
      p *= uniform();
    }
    return k;
  }

 private:
  std::uint64_t state_;
};

}  // namespace avakit::rng
