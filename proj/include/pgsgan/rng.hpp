#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace pgsgan {

// Seeded random stream. Sampling helpers avoid the implementation-defined
// std distributions so that a saved engine state is the whole story.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  // Stream for `label` derived from a master seed:
  // seed = splitmix64(master ^ fnv1a64(label)).
  static Rng derive(std::uint64_t master_seed, std::string_view label);
  static std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view label);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal (Box-Muller, no cached second value).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  // Index drawn from non-negative weights summing to ~1.
  std::size_t categorical(std::span<const double> probs);
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::string state() const;
  void restore(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace pgsgan
