#include "pgsgan/gan/objective.hpp"

#include <algorithm>
#include <cmath>

#include "pgsgan/errors.hpp"
#include "pgsgan/numcore/ops.hpp"

namespace pgsgan::gan::inline PGSGAN_PRECISION {
namespace {

// -log softmax(logits)[choice]; writes softmax into `probs` when given.
double softmax_nll(const real* logits, int k, int choice, double* probs) {
  double mx = logits[0];
  for (int j = 1; j < k; ++j) mx = std::max(mx, static_cast<double>(logits[j]));
  double z = 0.0;
  for (int j = 0; j < k; ++j) {
    const double e = std::exp(static_cast<double>(logits[j]) - mx);
    if (probs) probs[j] = e;
    z += e;
  }
  if (probs) {
    for (int j = 0; j < k; ++j) probs[j] /= z;
  }
  return std::log(z) + mx - static_cast<double>(logits[choice]);
}

// -log P(y) for a single logit with P(1) = sigmoid(l).
double binary_nll(double l, int y) {
  const double s = y ? -l : l;  // softplus(s)
  return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

double sigmoid(double l) { return l >= 0 ? 1.0 / (1.0 + std::exp(-l)) : std::exp(l) / (1.0 + std::exp(l)); }

void check_rows(const Tensor& logits, std::size_t rows, std::int64_t width, const char* op) {
  if (logits.rank() != 2 || logits.dim(1) != width || logits.dim(0) != static_cast<std::int64_t>(rows)) {
    throw ShapeError(std::string(op) + ": logits " + num::shape_string(logits.shape()) + " vs " +
                     std::to_string(rows) + " choices of width " + std::to_string(width));
  }
}

}  // namespace

Tensor policy_nll(const Tensor& logits, std::span<const Choice> choices) {
  check_rows(logits, choices.size(), kPolicyLogits, "policy_nll");
  constexpr int V = order::kNumValueClasses;
  const auto n = static_cast<std::int64_t>(choices.size());
  std::vector<Choice> ch(choices.begin(), choices.end());
  for (const auto& c : ch) {
    for (int f = 0; f < 3; ++f) {
      if (c[f] != 0 && c[f] != 1) throw std::invalid_argument("policy_nll: binary choice out of range");
    }
    if (c[3] < 0 || c[3] >= V || c[4] < 0 || c[4] >= V) {
      throw std::invalid_argument("policy_nll: class choice out of range");
    }
  }
  std::vector<real> out(static_cast<std::size_t>(n));
  const auto x = logits.data();
  for (std::int64_t b = 0; b < n; ++b) {
    const real* row = x.data() + b * kPolicyLogits;
    const auto& c = ch[b];
    double v = 0.0;
    for (int f = 0; f < 3; ++f) v += binary_nll(row[f], c[f]);
    v += softmax_nll(row + kPriceOffset, V, c[3], nullptr);
    v += softmax_nll(row + kVolumeOffset, V, c[4], nullptr);
    out[b] = static_cast<real>(v);
  }
  return num::make_result({n}, std::move(out), {logits}, [ch = std::move(ch)](num::detail::Node& self) {
    auto& in = *self.inputs[0];
    auto& g = in.grad_buffer();
    const auto n = static_cast<std::int64_t>(ch.size());
    double probs[V];
    for (std::int64_t b = 0; b < n; ++b) {
      const double up = self.grad[b];
      if (up == 0.0) continue;
      const real* row = in.value.data() + b * kPolicyLogits;
      real* grow = g.data() + b * kPolicyLogits;
      const auto& c = ch[b];
      for (int f = 0; f < 3; ++f) grow[f] += static_cast<real>(up * (sigmoid(row[f]) - c[f]));
      for (int head = 0; head < 2; ++head) {
        const int off = head == 0 ? kPriceOffset : kVolumeOffset;
        const int choice = c[3 + head];
        softmax_nll(row + off, V, choice, probs);
        for (int j = 0; j < V; ++j) grow[off + j] += static_cast<real>(up * (probs[j] - (j == choice ? 1.0 : 0.0)));
      }
    }
  });
}

Tensor categorical_nll(const Tensor& logits, std::span<const int> choices) {
  if (logits.rank() != 2) throw ShapeError("categorical_nll: logits must be [batch,k]");
  const auto k = static_cast<int>(logits.dim(1));
  check_rows(logits, choices.size(), k, "categorical_nll");
  std::vector<int> ch(choices.begin(), choices.end());
  for (int c : ch) {
    if (c < 0 || c >= k) throw std::invalid_argument("categorical_nll: choice out of range");
  }
  const auto n = static_cast<std::int64_t>(ch.size());
  std::vector<real> out(static_cast<std::size_t>(n));
  for (std::int64_t b = 0; b < n; ++b) {
    out[b] = static_cast<real>(softmax_nll(logits.data().data() + b * k, k, ch[b], nullptr));
  }
  return num::make_result({n}, std::move(out), {logits}, [ch = std::move(ch), k](num::detail::Node& self) {
    auto& in = *self.inputs[0];
    auto& g = in.grad_buffer();
    std::vector<double> probs(static_cast<std::size_t>(k));
    for (std::size_t b = 0; b < ch.size(); ++b) {
      const double up = self.grad[b];
      softmax_nll(in.value.data() + b * k, k, ch[b], probs.data());
      for (int j = 0; j < k; ++j) g[b * k + j] += static_cast<real>(up * (probs[j] - (j == ch[b] ? 1.0 : 0.0)));
    }
  });
}

std::vector<Policy> policies_of(const Tensor& logits) {
  if (logits.rank() != 2 || logits.dim(1) != kPolicyLogits) {
    throw ShapeError("policies_of: logits must be [batch,83], got " + num::shape_string(logits.shape()));
  }
  std::vector<Policy> out;
  out.reserve(static_cast<std::size_t>(logits.dim(0)));
  std::array<double, kPolicyLogits> row{};
  for (std::int64_t b = 0; b < logits.dim(0); ++b) {
    for (int j = 0; j < kPolicyLogits; ++j) row[j] = logits.at(b * kPolicyLogits + j);
    out.push_back(Policy::from_logits(row));
  }
  return out;
}

Tensor critic_loss(const Tensor& c_fake, const Tensor& c_real, LossVariant v) {
  if (v == LossVariant::plain) return num::sub(num::mean(c_fake), num::mean(c_real));
  Tensor f = num::mean(num::relu(num::add_scalar(c_fake, real(1))));
  Tensor r = num::mean(num::relu(num::add_scalar(num::scale(c_real, real(-1)), real(1))));
  return num::add(f, r);
}

Tensor weighted_nll_loss(const Tensor& nll, std::span<const double> weights) {
  if (nll.rank() != 1 || nll.dim(0) != static_cast<std::int64_t>(weights.size())) {
    throw ShapeError("weighted_nll_loss: " + std::to_string(weights.size()) + " weights for nll " +
                     num::shape_string(nll.shape()));
  }
  std::vector<real> w(weights.begin(), weights.end());
  return num::mean(num::mul(nll, Tensor::from(nll.shape(), std::move(w))));
}

namespace {

std::vector<double> softmax(std::span<const real> logits) {
  std::vector<double> p(logits.size());
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) z += (p[j] = std::exp(logits[j] - mx));
  for (auto& v : p) v /= z;
  return p;
}

// Loss whose negated gradient is the REINFORCE ascent direction.
Tensor bandit_loss(const Tensor& logits_row, std::span<const double> rewards, int samples, Rng& rng) {
  const auto p = softmax(logits_row.data());
  std::vector<int> actions(static_cast<std::size_t>(samples));
  std::vector<double> r(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    actions[i] = static_cast<int>(rng.categorical(p));
    r[i] = rewards[actions[i]];
  }
  Tensor nll = categorical_nll(num::repeat_rows(logits_row, samples), actions);
  return weighted_nll_loss(nll, generator_weights(r, LossVariant::plain));
}

}  // namespace

std::vector<double> reinforce_bandit_check(std::span<const double> rewards, int steps, double lr, Rng& rng,
                                           int batch, std::vector<double> initial_logits) {
  const auto k = static_cast<std::int64_t>(rewards.size());
  if (k < 2) throw std::invalid_argument("reinforce_bandit_check: need at least 2 classes");
  if (batch < 2) throw std::invalid_argument("reinforce_bandit_check: batch baseline needs batch >= 2");
  if (initial_logits.empty()) initial_logits.assign(static_cast<std::size_t>(k), 0.0);
  Tensor theta = Tensor::from({1, k}, std::vector<real>(initial_logits.begin(), initial_logits.end()), true);
  for (int s = 0; s < steps; ++s) {
    theta.zero_grad();
    num::backward(bandit_loss(theta, rewards, batch, rng));
    const auto g = theta.grad();
    auto w = theta.mutable_data();
    for (std::int64_t j = 0; j < k; ++j) w[j] = static_cast<real>(w[j] - lr * g[j]);
  }
  return softmax(theta.data());
}

std::vector<double> reinforce_gradient_estimate(std::span<const double> logits, std::span<const double> rewards,
                                                int samples, Rng& rng) {
  if (logits.size() != rewards.size()) throw std::invalid_argument("reinforce_gradient_estimate: size mismatch");
  const auto k = static_cast<std::int64_t>(logits.size());
  Tensor theta = Tensor::from({1, k}, std::vector<real>(logits.begin(), logits.end()), true);
  num::backward(bandit_loss(theta, rewards, samples, rng));
  const auto g = theta.grad();
  std::vector<double> out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) out[j] = -static_cast<double>(g[j]);
  return out;
}

}  // namespace pgsgan::gan::inline PGSGAN_PRECISION
