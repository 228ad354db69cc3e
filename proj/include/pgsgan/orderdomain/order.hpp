#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace pgsgan::order {

inline constexpr int kNumValueClasses = 40;  // price and volume heads
inline constexpr int kMaxValueClass = kNumValueClasses - 1;
inline constexpr int kNumClasses = 2 * 2 * 2 * kNumValueClasses * kNumValueClasses;  // 12,800
inline constexpr int kHistoryLength = 20;
inline constexpr int kHistoryFeatures = 7;
inline constexpr int kQuoteFeatures = 2;
inline constexpr int kOrderFeatures = 5;

// Field values: side 0=sell 1=buy, action 0=new 1=cancel, is_mo 0/1.
// price_class counts ticks from the reference best quote, volume_class is
// volume over the minimum volume unit; both clipped to [0, 39].
struct Order {
  int side = 0;
  int action = 0;
  int is_mo = 0;
  int price_class = 0;
  int volume_class = 0;

  friend bool operator==(const Order&, const Order&) = default;

  bool valid() const noexcept;
  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  std::string to_string() const;
};

// An order as it appears in a feed, with the best quotes in force just
// before it arrived.
struct RawOrder {
  int side = 0;
  int action = 0;
  int is_mo = 0;
  double raw_price = 0.0;
  double raw_volume = 0.0;
  double best_bid = 0.0;
  double best_ask = 0.0;
  double tick_size = 1.0;
  double min_volume_unit = 1.0;

  void validate() const;
};

// Which best quote "ticks from the best price" is measured against.
// opposite_best: a buy is measured from the best ask, a sell from the best bid
// (a buy resting at the ask is 0 ticks). same_best measures from the order's
// own side of the book.
enum class PriceReference { opposite_best, same_best };

int clip_to_class(std::int64_t value);

// Raw -> discrete. Prices crossing the reference quote count as 0 ticks.
// Market orders always map to price class 0.
Order discretize(const RawOrder& raw, PriceReference ref = PriceReference::opposite_best);

// Inverse of discretize for a given quote context; used to test idempotence.
RawOrder to_raw(const Order& o, double best_bid, double best_ask, double tick_size,
                double min_volume_unit, PriceReference ref = PriceReference::opposite_best);

// side outermost, volume innermost. Only field ranges are checked: the
// market-order cells with nonzero price belong to the space but never occur.
// side*6400 + action*3200 + is_mo*1600 + price*40 + volume.
int class_index(const Order& o);
Order order_of_index(int index);

// Encoded conditional input for the networks: 20 history rows of
// [side, action, is_mo, price/39, volume/39, spread_norm, mid_return] in
// chronological order, plus the current [spread_norm, mid_return].
struct Condition {
  std::array<double, kHistoryLength * kHistoryFeatures> history{};
  std::array<double, kQuoteFeatures> quotes{};

  double at(int step, int feature) const { return history[step * kHistoryFeatures + feature]; }
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct Quote {
  double best_bid = 0.0;
  double best_ask = 0.0;
};

// Spread in ticks, clipped to 39, divided by 39.
double spread_feature(const Quote& q, double tick_size);
// log(mid / reference_mid) clipped to [-1, 1].
double mid_return_feature(const Quote& q, const Quote& reference);

Condition encode_condition(std::span<const RawOrder> history, const Quote& current,
                           PriceReference ref = PriceReference::opposite_best);

// First five history-row features for a single order.
std::array<double, kOrderFeatures> order_features(const Order& o);

}  // namespace pgsgan::order
