#include "pgsgan/gan/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pgsgan::gan {
namespace {

constexpr int kV = order::kNumValueClasses;

// log(sigmoid(x)) without overflow.
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::array<double, kV> softmax(const std::array<double, kV>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::array<double, kV> p;
  double s = 0.0;
  for (int i = 0; i < kV; ++i) s += (p[i] = std::exp(z[i] - m));
  for (double& v : p) v /= s;
  return p;
}

double log_softmax_at(const std::array<double, kV>& z, int k) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return z[k] - m - std::log(s);
}

double log_binary(double logit, int value) { return log_sigmoid(value ? logit : -logit); }

double binary_entropy_bits(double logit) {
  const double p = sigmoid(logit);
  const double lp = log_sigmoid(logit), lq = log_sigmoid(-logit);
  return -(p * lp + (1.0 - p) * lq) / std::log(2.0);
}

double categorical_entropy_bits(const std::array<double, kV>& z) {
  const auto p = softmax(z);
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  const double log_norm = m + std::log(s);
  double h = 0.0;
  for (int i = 0; i < kV; ++i) h -= p[i] * (z[i] - log_norm);
  return h / std::log(2.0);
}

// Rounded half away from zero and clipped to the class range; NaN maps to 0.
int round_to_class(double v) {
  if (std::isnan(v)) return 0;
  return static_cast<int>(std::clamp(std::round(v), 0.0, double(order::kMaxValueClass)));
}

}  // namespace

Policy Policy::from_logits(std::span<const double> logits) {
  if (logits.size() != static_cast<std::size_t>(kPolicyLogits)) {
    throw std::invalid_argument("Policy::from_logits: expected 83 logits");
  }
  Policy p;
  p.logit_side = logits[0];
  p.logit_action = logits[1];
  p.logit_mo = logits[2];
  std::copy_n(logits.begin() + kPriceOffset, kV, p.logits_price.begin());
  std::copy_n(logits.begin() + kVolumeOffset, kV, p.logits_volume.begin());
  return p;
}

Policy Policy::one_hot(const order::Order& o, double sharpness) {
  Policy p;
  p.logit_side = o.side ? sharpness : -sharpness;
  p.logit_action = o.action ? sharpness : -sharpness;
  p.logit_mo = o.is_mo ? sharpness : -sharpness;
  p.logits_price.fill(-sharpness);
  p.logits_volume.fill(-sharpness);
  p.logits_price[o.price_class] = sharpness;
  p.logits_volume[o.volume_class] = sharpness;
  return p;
}

Policy::Factors Policy::factors() const {
  Factors f;
  const double ps = sigmoid(logit_side), pa = sigmoid(logit_action), pm = sigmoid(logit_mo);
  f.side = {sigmoid(-logit_side), ps};
  f.action = {sigmoid(-logit_action), pa};
  f.mo = {sigmoid(-logit_mo), pm};
  f.price = softmax(logits_price);
  f.volume = softmax(logits_volume);
  return f;
}

double Policy::joint_probability(const order::Order& o) const {
  return std::exp(-nll(*this, o));
}

double nll(const Policy& p, const order::Order& o) {
  return -(log_binary(p.logit_side, o.side) + log_binary(p.logit_action, o.action) +
           log_binary(p.logit_mo, o.is_mo) + log_softmax_at(p.logits_price, o.price_class) +
           log_softmax_at(p.logits_volume, o.volume_class));
}

double nll(const Policy& p, const SampledOrder& s) {
  order::Order o = s.emitted;
  o.price_class = s.sampled_price;
  return -(log_binary(p.logit_side, o.side) + log_binary(p.logit_action, o.action) +
           log_binary(p.logit_mo, o.is_mo) + log_softmax_at(p.logits_price, o.price_class) +
           log_softmax_at(p.logits_volume, o.volume_class));
}

double entropy_bits(const Policy& p) {
  return binary_entropy_bits(p.logit_side) + binary_entropy_bits(p.logit_action) +
         binary_entropy_bits(p.logit_mo) + categorical_entropy_bits(p.logits_price) +
         categorical_entropy_bits(p.logits_volume);
}

SampledOrder sample_order(const Policy& p, Rng& rng) {
  const auto f = p.factors();
  SampledOrder s;
  s.emitted.side = rng.uniform() < f.side[1] ? 1 : 0;
  s.emitted.action = rng.uniform() < f.action[1] ? 1 : 0;
  s.emitted.is_mo = rng.uniform() < f.mo[1] ? 1 : 0;
  s.sampled_price = static_cast<int>(rng.categorical(f.price));
  s.emitted.volume_class = static_cast<int>(rng.categorical(f.volume));
  s.emitted.price_class = s.emitted.is_mo ? 0 : s.sampled_price;
  return s;
}

order::Order round_to_discrete(std::span<const double, 5> v) {
  order::Order o;
  o.side = v[0] >= 0.5 ? 1 : 0;
  o.action = v[1] >= 0.5 ? 1 : 0;
  o.is_mo = v[2] >= 0.5 ? 1 : 0;
  o.price_class = round_to_class(v[3]);
  o.volume_class = round_to_class(v[4]);
  if (o.is_mo) o.price_class = 0;
  return o;
}

}  // namespace pgsgan::gan
