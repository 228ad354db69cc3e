#pragma once

#include <array>
#include <span>

#include "pgsgan/orderdomain/order.hpp"
#include "pgsgan/rng.hpp"

namespace pgsgan::gan {

inline constexpr int kSeedDim = 128;
// 3 binary logits + 40 price logits + 40 volume logits.
inline constexpr int kPolicyLogits = 3 + 2 * order::kNumValueClasses;
inline constexpr int kPriceOffset = 3;
inline constexpr int kVolumeOffset = 3 + order::kNumValueClasses;

// Factorized categorical distribution over the 12,800 order classes.
// Binary heads are single logits: sigmoid(logit) is the probability of
// value 1 (buy, cancel, market order).
struct Policy {
  double logit_side = 0.0;
  double logit_action = 0.0;
  double logit_mo = 0.0;
  std::array<double, order::kNumValueClasses> logits_price{};
  std::array<double, order::kNumValueClasses> logits_volume{};

  static Policy uniform() { return {}; }
  // Logits laid out as [side, action, mo, price[40], volume[40]].
  static Policy from_logits(std::span<const double> logits);
  // Policy putting (numerically) all mass on one order.
  static Policy one_hot(const order::Order& o, double sharpness = 200.0);

  struct Factors {
    std::array<double, 2> side;
    std::array<double, 2> action;
    std::array<double, 2> mo;
    std::array<double, order::kNumValueClasses> price;
    std::array<double, order::kNumValueClasses> volume;
  };
  Factors factors() const;

  // Product of the five factor probabilities.
  double joint_probability(const order::Order& o) const;
};

// Natural-log negative log-likelihood of the sampled factor values. For a
// market order the price factor still enters with the sampled price value.
struct SampledOrder {
  order::Order emitted;   // price forced to 0 when is_mo
  int sampled_price = 0;  // price factor value as drawn
};

double nll(const Policy& p, const order::Order& o);
double nll(const Policy& p, const SampledOrder& s);

// Shannon entropy in bits, as the sum of the five factor entropies.
double entropy_bits(const Policy& p);

// Each factor drawn independently: side, action, mo, price, volume in that order.
SampledOrder sample_order(const Policy& p, Rng& rng);

// DCGAN-style continuous output -> discrete order: binaries are 1 when
// >= 0.5, price/volume rounded half away from zero and clipped to [0, 39],
// then market orders get price 0.
order::Order round_to_discrete(std::span<const double, 5> values);

inline constexpr double kByChanceNll = 9.457200;      // ln(12800)
inline constexpr double kByChanceEntropy = 13.643856;  // log2(12800)

}  // namespace pgsgan::gan
