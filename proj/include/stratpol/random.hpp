#pragma once

#include <cstdint>
#include <limits>

namespace stratpol {

/// SplitMix64 generator. The state is one word, so handing every simulated
/// agent its own engine costs nothing; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Stafford's mix13 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// What a random stream is used for. Streams for different purposes never
/// share draws, and the evaluation stream depends only on the seed so every
/// method is scored on the same agents.
enum class Purpose : std::uint64_t {
  agents = 1,        // per-step batch of agent types
  perturbation = 2,  // per-step sign matrix
  evaluation = 3,    // out-of-band objective evaluation (shared across methods)
  baseline = 4,      // manipulation-free batch for the naive fit
  oracle = 5,        // finite-difference oracle draws
};

/// A node in a deterministic tree of random streams. Children are keyed by
/// (purpose, step, agent) so results never depend on the order of draws
/// elsewhere in the program.
class Stream {
 public:
  explicit constexpr Stream(std::uint64_t seed) noexcept : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  constexpr Stream child(std::uint64_t tag) const noexcept {
    return Stream(Raw{}, mix64(key_ ^ mix64(tag + 0x9e3779b97f4a7c15ULL)));
  }
  constexpr Stream child(Purpose purpose) const noexcept {
    return child(static_cast<std::uint64_t>(purpose));
  }

  constexpr SplitMix64 engine() const noexcept { return SplitMix64(key_); }
  constexpr SplitMix64 engine(std::uint64_t index) const noexcept { return child(index).engine(); }

  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  struct Raw {};
  constexpr Stream(Raw, std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t key_;
};

}  // namespace stratpol
