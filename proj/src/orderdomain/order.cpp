#include "pgsgan/orderdomain/order.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pgsgan/errors.hpp"

namespace pgsgan::order {
namespace {

bool is_binary(int v) { return v == 0 || v == 1; }

// Integer multiple check with a relative tolerance for decimal prices.
bool on_grid(double value, double unit, std::int64_t* steps) {
  const double q = value / unit;
  const double r = std::round(q);
  if (std::abs(q - r) > 1e-6 * std::max(1.0, std::abs(q))) return false;
  *steps = static_cast<std::int64_t>(r);
  return true;
}

}  // namespace

bool Order::valid() const noexcept {
  return is_binary(side) && is_binary(action) && is_binary(is_mo) && price_class >= 0 &&
         price_class <= kMaxValueClass && volume_class >= 0 && volume_class <= kMaxValueClass &&
         (is_mo == 0 || price_class == 0);
}

namespace {

void validate_fields(const Order& o) {
  if (!is_binary(o.side)) throw std::invalid_argument("order: side must be 0 or 1");
  if (!is_binary(o.action)) throw std::invalid_argument("order: action must be 0 or 1");
  if (!is_binary(o.is_mo)) throw std::invalid_argument("order: is_mo must be 0 or 1");
  if (o.price_class < 0 || o.price_class > kMaxValueClass) {
    throw std::invalid_argument("order: price_class out of [0,39]: " + std::to_string(o.price_class));
  }
  if (o.volume_class < 0 || o.volume_class > kMaxValueClass) {
    throw std::invalid_argument("order: volume_class out of [0,39]: " + std::to_string(o.volume_class));
  }
}

}  // namespace

void Order::validate() const {
  validate_fields(*this);
  if (is_mo == 1 && price_class != 0) {
    throw std::invalid_argument("order: market order must have price_class 0");
  }
}

std::string Order::to_string() const {
  std::ostringstream os;
  os << "Order(" << side << ',' << action << ',' << is_mo << ',' << price_class << ','
     << volume_class << ')';
  return os.str();
}

void RawOrder::validate() const {
  if (!is_binary(side) || !is_binary(action) || !is_binary(is_mo)) {
    throw DataError("raw order: side/action/is_mo must be 0 or 1");
  }
  if (!(best_bid > 0.0)) throw DataError("raw order: best_bid must be positive");
  if (!(best_ask >= best_bid)) throw DataError("raw order: best_ask below best_bid");
  if (!(tick_size > 0.0)) throw DataError("raw order: tick_size must be positive");
  if (!(min_volume_unit > 0.0)) throw DataError("raw order: min_volume_unit must be positive");
  if (raw_volume < 0.0) throw DataError("raw order: negative volume");
  std::int64_t steps = 0;
  if (!on_grid(raw_price, tick_size, &steps)) {
    throw DataError("raw order: price " + std::to_string(raw_price) + " not aligned to tick " +
                    std::to_string(tick_size));
  }
  if (!on_grid(raw_volume, min_volume_unit, &steps)) {
    throw DataError("raw order: volume " + std::to_string(raw_volume) +
                    " not a multiple of the minimum volume unit");
  }
}

int clip_to_class(std::int64_t value) {
  if (value < 0) throw std::invalid_argument("clip_to_class: negative value " + std::to_string(value));
  return static_cast<int>(std::min<std::int64_t>(value, kMaxValueClass));
}

Order discretize(const RawOrder& raw, PriceReference ref) {
  raw.validate();
  Order o;
  o.side = raw.side;
  o.action = raw.action;
  o.is_mo = raw.is_mo;

  std::int64_t volume_units = 0;
  on_grid(raw.raw_volume, raw.min_volume_unit, &volume_units);
  o.volume_class = clip_to_class(volume_units);

  if (raw.is_mo) {
    o.price_class = 0;
    return o;
  }
  double reference = 0.0;
  double distance = 0.0;
  const bool buy = raw.side == 1;
  if (ref == PriceReference::opposite_best) {
    reference = buy ? raw.best_ask : raw.best_bid;
  } else {
    reference = buy ? raw.best_bid : raw.best_ask;
  }
  distance = buy ? reference - raw.raw_price : raw.raw_price - reference;
  const auto ticks = static_cast<std::int64_t>(std::llround(distance / raw.tick_size));
  o.price_class = clip_to_class(std::max<std::int64_t>(ticks, 0));
  return o;
}

RawOrder to_raw(const Order& o, double best_bid, double best_ask, double tick_size,
                double min_volume_unit, PriceReference ref) {
  RawOrder r;
  r.side = o.side;
  r.action = o.action;
  r.is_mo = o.is_mo;
  r.best_bid = best_bid;
  r.best_ask = best_ask;
  r.tick_size = tick_size;
  r.min_volume_unit = min_volume_unit;
  r.raw_volume = o.volume_class * min_volume_unit;
  const bool buy = o.side == 1;
  const double reference = (ref == PriceReference::opposite_best) == buy ? best_ask : best_bid;
  r.raw_price = buy ? reference - o.price_class * tick_size : reference + o.price_class * tick_size;
  if (o.is_mo) r.raw_price = reference;
  return r;
}

int class_index(const Order& o) {
  validate_fields(o);
  return o.side * 6400 + o.action * 3200 + o.is_mo * 1600 + o.price_class * kNumValueClasses +
         o.volume_class;
}

Order order_of_index(int index) {
  if (index < 0 || index >= kNumClasses) {
    throw std::out_of_range("order_of_index: " + std::to_string(index));
  }
  Order o;
  o.side = index / 6400;
  o.action = (index / 3200) % 2;
  o.is_mo = (index / 1600) % 2;
  o.price_class = (index / kNumValueClasses) % kNumValueClasses;
  o.volume_class = index % kNumValueClasses;
  return o;
}

double spread_feature(const Quote& q, double tick_size) {
  const auto ticks = std::llround((q.best_ask - q.best_bid) / tick_size);
  return static_cast<double>(clip_to_class(std::max<long long>(ticks, 0))) / kMaxValueClass;
}

double mid_return_feature(const Quote& q, const Quote& reference) {
  const double mid = 0.5 * (q.best_bid + q.best_ask);
  const double ref_mid = 0.5 * (reference.best_bid + reference.best_ask);
  return std::clamp(std::log(mid / ref_mid), -1.0, 1.0);
}

Condition encode_condition(std::span<const RawOrder> history, const Quote& current,
                           PriceReference ref) {
  if (history.size() != static_cast<std::size_t>(kHistoryLength)) {
    throw std::invalid_argument("encode_condition: history must hold exactly 20 orders, got " +
                                std::to_string(history.size()));
  }
  Condition c;
  const Quote first{history.front().best_bid, history.front().best_ask};
  for (int t = 0; t < kHistoryLength; ++t) {
    const RawOrder& r = history[t];
    const Order o = discretize(r, ref);
    const auto f = order_features(o);
    double* row = &c.history[t * kHistoryFeatures];
    std::copy(f.begin(), f.end(), row);
    const Quote q{r.best_bid, r.best_ask};
    row[5] = spread_feature(q, r.tick_size);
    row[6] = mid_return_feature(q, first);
  }
  c.quotes[0] = spread_feature(current, history.back().tick_size);
  c.quotes[1] = mid_return_feature(current, first);
  return c;
}

std::array<double, kOrderFeatures> order_features(const Order& o) {
  return {static_cast<double>(o.side), static_cast<double>(o.action), static_cast<double>(o.is_mo),
          o.price_class / static_cast<double>(kMaxValueClass),
          o.volume_class / static_cast<double>(kMaxValueClass)};
}

}  // namespace pgsgan::order
