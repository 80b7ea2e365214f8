// Counter-based seed derivation and lightweight random streams.
//
// Every random quantity in a simulation is drawn from a Stream whose seed is
// derived from (base_seed, purpose, indices...).  Streams for distinct tuples
// are disjoint, so trials, agents and time steps can be evaluated in any
// order with identical results.

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace dmed::rng {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 output function (Stafford mix13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Hash-chains a tuple of words onto a seed.  Used for substream keys:
// derive(base, {purpose, trial}) or derive(trial_seed, {purpose, agent, t}).
constexpr std::uint64_t derive(std::uint64_t seed,
                               std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = mix64(seed + kGoldenGamma);
  for (std::uint64_t w : words) {
    h = mix64((h + kGoldenGamma) ^ mix64(w + kGoldenGamma));
  }
  return h;
}

// Stream purposes; part of the substream key so that e.g. the observation
// stream of agent 0 never aliases the dropout stream of step 0.
enum class Purpose : std::uint64_t {
  kTrial = 1,
  kObservation = 2,
  kDropout = 3,
  kGraphGen = 4,
  kLemma1 = 5,
};

constexpr std::uint64_t to_word(Purpose p) noexcept {
  return static_cast<std::uint64_t>(p);
}

// SplitMix64 sequence starting from a derived seed.  Statistically solid for
// Monte-Carlo use and cheap enough to construct per (agent, step).
class Stream {
 public:
  explicit Stream(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double next_normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] keeps the log finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  bool next_bernoulli(double p_true) noexcept { return next_double() < p_true; }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dmed::rng
