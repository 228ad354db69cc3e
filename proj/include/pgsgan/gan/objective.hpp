#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "pgsgan/gan/policy.hpp"
#include "pgsgan/numcore/tensor.hpp"

namespace pgsgan::gan {

enum class LossVariant { plain, hinge };
std::string to_string(LossVariant v);
// Throws UsageError for anything but "plain" / "hinge".
LossVariant parse_loss_variant(const std::string& s);

// plain: mean(fake) - mean(real)
// hinge: mean(max(1 + fake, 0)) + mean(max(1 - real, 0))
double critic_loss(std::span<const double> c_fake, std::span<const double> c_real, LossVariant v);
double batch_baseline(std::span<const double> c_fake);
// (c_fake - baseline) * nll; only nll carries gradient in training.
double generator_loss(double c_fake, double baseline, double nll);

// Per-sample coefficients on the fake-order NLL in the generator loss,
// held constant during the generator update.
//   plain: c - mean(c)
//   hinge: -max(1 - c, 0), no baseline, so a critic scoring every fake at
//          0 still pushes probability away from the sampled orders.
std::vector<double> generator_weights(std::span<const double> c_fake, LossVariant v);

// Factor values fed to the likelihood: [side, action, is_mo, price, volume].
// For a sampled market order the price is the drawn value, not the forced 0.
using Choice = std::array<int, 5>;
Choice choice_of(const order::Order& o);
Choice choice_of(const SampledOrder& s);

}  // namespace pgsgan::gan

namespace pgsgan::gan::inline PGSGAN_PRECISION {

using num::Tensor;

// NLL in nats of each row's choice under policy logits [B,83] -> [B].
// The gradient w.r.t. a softmax head is p - onehot, w.r.t. a binary logit
// sigmoid(l) - y.
Tensor policy_nll(const Tensor& logits, std::span<const Choice> choices);
// NLL of one categorical choice per row under logits [B,k] -> [B].
Tensor categorical_nll(const Tensor& logits, std::span<const int> choices);

std::vector<Policy> policies_of(const Tensor& logits);

Tensor critic_loss(const Tensor& c_fake, const Tensor& c_real, LossVariant v);
// mean_i(weights_i * nll_i).
Tensor weighted_nll_loss(const Tensor& nll, std::span<const double> weights);

// REINFORCE miniature: a softmax policy over k = rewards.size() classes.
// Each step draws `batch` actions, weights their NLL by (r - batch mean r)
// and takes a plain gradient step of size `lr`. Returns the final policy.
std::vector<double> reinforce_bandit_check(std::span<const double> rewards, int steps, double lr, Rng& rng,
                                           int batch = 16, std::vector<double> initial_logits = {});
// Ascent direction for E[r] estimated from `samples` draws with the batch
// baseline: -(d/dlogits) mean((r - B) * nll).
std::vector<double> reinforce_gradient_estimate(std::span<const double> logits, std::span<const double> rewards,
                                                int samples, Rng& rng);

}  // namespace pgsgan::gan::inline PGSGAN_PRECISION
