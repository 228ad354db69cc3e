#include <algorithm>
#include <stdexcept>

#include "pgsgan/errors.hpp"
#include "pgsgan/gan/objective.hpp"

namespace pgsgan::gan {
namespace {

double mean_of(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("empty score batch");
  // Shifted by the first score so that a batch of equal scores has exactly
  // that score as its mean.
  double d = 0.0;
  for (double x : v) d += x - v.front();
  return v.front() + d / static_cast<double>(v.size());
}

}  // namespace

std::string to_string(LossVariant v) { return v == LossVariant::plain ? "plain" : "hinge"; }

LossVariant parse_loss_variant(const std::string& s) {
  if (s == "plain") return LossVariant::plain;
  if (s == "hinge") return LossVariant::hinge;
  throw UsageError("unknown loss variant `" + s + "` (expected plain or hinge)");
}

double critic_loss(std::span<const double> c_fake, std::span<const double> c_real, LossVariant v) {
  if (c_fake.empty() || c_real.empty()) throw std::invalid_argument("critic_loss: empty batch");
  if (v == LossVariant::plain) return mean_of(c_fake) - mean_of(c_real);
  double f = 0.0, r = 0.0;
  for (double c : c_fake) f += std::max(1.0 + c, 0.0);
  for (double c : c_real) r += std::max(1.0 - c, 0.0);
  return f / static_cast<double>(c_fake.size()) + r / static_cast<double>(c_real.size());
}

double batch_baseline(std::span<const double> c_fake) { return mean_of(c_fake); }

double generator_loss(double c_fake, double baseline, double nll) { return (c_fake - baseline) * nll; }

std::vector<double> generator_weights(std::span<const double> c_fake, LossVariant v) {
  std::vector<double> w(c_fake.size());
  if (v == LossVariant::plain) {
    const double b = batch_baseline(c_fake);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = c_fake[i] - b;
  } else {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = -std::max(1.0 - c_fake[i], 0.0);
  }
  return w;
}

Choice choice_of(const order::Order& o) { return {o.side, o.action, o.is_mo, o.price_class, o.volume_class}; }

Choice choice_of(const SampledOrder& s) {
  return {s.emitted.side, s.emitted.action, s.emitted.is_mo, s.sampled_price, s.emitted.volume_class};
}

}  // namespace pgsgan::gan
