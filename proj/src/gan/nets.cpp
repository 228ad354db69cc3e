#include "pgsgan/gan/nets.hpp"

#include <cmath>

#include "pgsgan/errors.hpp"
#include "pgsgan/numcore/ops.hpp"

namespace pgsgan::gan::inline PGSGAN_PRECISION {
namespace {

using num::Conv1dSpec;
using num::PadMode;

std::vector<int> to_widths(const std::vector<double>& v, const std::string& key) {
  std::vector<int> out;
  for (double d : v) {
    if (d != static_cast<int>(d)) throw UsageError("config key `" + key + "` must list integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

NetConfig NetConfig::small() {
  NetConfig c;
  c.enc_channels = 16;
  c.enc_convs_per_stage = 1;
  c.enc_out = 32;
  c.mix_channels = 4;
  c.mix_circular = 1;
  c.gen_hidden = {128, 128};
  c.critic_order_embed = 16;
  c.critic_hidden = {128, 64};
  return c;
}

void NetConfig::validate() const {
  auto positive = [](int v, const char* key) {
    if (v <= 0) throw UsageError(std::string("config key `net.") + key + "` must be positive");
  };
  positive(enc_channels, "enc_channels");
  positive(enc_convs_per_stage, "enc_convs_per_stage");
  positive(enc_out, "enc_out");
  positive(mix_channels, "mix_channels");
  positive(mix_circular, "mix_circular");
  positive(critic_order_embed, "critic_order_embed");
  for (int w : gen_hidden) positive(w, "gen_hidden");
  for (int w : critic_hidden) positive(w, "critic_hidden");
  if (gen_hidden.empty()) throw UsageError("config key `net.gen_hidden` must not be empty");
  if (critic_hidden.empty()) throw UsageError("config key `net.critic_hidden` must not be empty");
}

std::vector<std::string> NetConfig::keys() {
  return {"net.enc_channels", "net.enc_convs_per_stage", "net.enc_out",          "net.mix_channels",
          "net.mix_circular", "net.gen_hidden",          "net.critic_order_embed", "net.critic_hidden"};
}

void NetConfig::apply(const KeyValues& kv) {
  auto int_key = [&](const char* key, int& field) {
    field = static_cast<int>(kv.get_int_or(std::string("net.") + key, field));
  };
  int_key("enc_channels", enc_channels);
  int_key("enc_convs_per_stage", enc_convs_per_stage);
  int_key("enc_out", enc_out);
  int_key("mix_channels", mix_channels);
  int_key("mix_circular", mix_circular);
  int_key("critic_order_embed", critic_order_embed);
  if (kv.contains("net.gen_hidden")) gen_hidden = to_widths(kv.get_doubles("net.gen_hidden"), "net.gen_hidden");
  if (kv.contains("net.critic_hidden")) {
    critic_hidden = to_widths(kv.get_doubles("net.critic_hidden"), "net.critic_hidden");
  }
}

void NetConfig::store(KeyValues& kv) const {
  kv.set("net.enc_channels", enc_channels);
  kv.set("net.enc_convs_per_stage", enc_convs_per_stage);
  kv.set("net.enc_out", enc_out);
  kv.set("net.mix_channels", mix_channels);
  kv.set("net.mix_circular", mix_circular);
  kv.set("net.gen_hidden", join(gen_hidden));
  kv.set("net.critic_order_embed", critic_order_embed);
  kv.set("net.critic_hidden", join(critic_hidden));
}

ConditionBatch condition_batch(std::span<const order::Condition* const> conds) {
  const auto n = static_cast<std::int64_t>(conds.size());
  constexpr int F = order::kHistoryFeatures, T = order::kHistoryLength;
  std::vector<real> hist(static_cast<std::size_t>(n * F * T)), quotes(static_cast<std::size_t>(n * 2));
  for (std::int64_t b = 0; b < n; ++b) {
    const auto& c = *conds[b];
    for (int f = 0; f < F; ++f) {
      for (int t = 0; t < T; ++t) hist[(b * F + f) * T + t] = static_cast<real>(c.at(t, f));
    }
    quotes[b * 2] = static_cast<real>(c.quotes[0]);
    quotes[b * 2 + 1] = static_cast<real>(c.quotes[1]);
  }
  return {Tensor::from({n, F, T}, std::move(hist)), Tensor::from({n, 2}, std::move(quotes))};
}

ConditionBatch condition_batch(std::span<const order::Condition> conds) {
  std::vector<const order::Condition*> ptrs;
  ptrs.reserve(conds.size());
  for (const auto& c : conds) ptrs.push_back(&c);
  return condition_batch(std::span<const order::Condition* const>(ptrs));
}

ConditionEncoder::ConditionEncoder(num::ParamStore& store, const std::string& prefix, const NetConfig& cfg,
                                   Rng& init)
    : out_(cfg.enc_out) {
  const Conv1dSpec same{1, 1, 1, PadMode::zero};
  const int c = cfg.enc_channels;
  std::int64_t len = order::kHistoryLength;
  for (int s = 0; s < 3; ++s) {
    std::vector<ConvBlock> stage;
    for (int k = 0; k < cfg.enc_convs_per_stage; ++k) {
      const std::string name = prefix + "stage" + std::to_string(s) + ".conv" + std::to_string(k);
      const int in_ch = (s == 0 && k == 0) ? order::kHistoryFeatures : c;
      stage.push_back({num::Conv1d(store, name, in_ch, c, 3, same, init),
                       num::LayerNorm(store, name + ".norm", {c, len})});
    }
    stages_.push_back(std::move(stage));
    if (s < 2) len /= 2;
  }
  proj_ = num::Linear(store, prefix + "proj", c * len + order::kQuoteFeatures, cfg.enc_out, init);
  const int k = cfg.mix_channels;
  dilated_ = num::Conv1d(store, prefix + "mix.dilated", 1, k, 3, Conv1dSpec{1, 2, 2, PadMode::zero}, init);
  for (int i = 0; i < cfg.mix_circular; ++i) {
    const int out_ch = i + 1 == cfg.mix_circular ? 1 : k;
    circular_.emplace_back(store, prefix + "mix.circular" + std::to_string(i), k, out_ch, 3,
                           Conv1dSpec{1, 1, 1, PadMode::circular}, init);
  }
}

Tensor ConditionEncoder::operator()(const ConditionBatch& in, Phase phase) {
  Tensor x = in.history;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (auto& block : stages_[s]) x = num::leaky_relu(block.norm(block.conv(x, phase)));
    if (s + 1 < stages_.size()) x = num::avg_pool1d(x, 2, 2);
  }
  const auto b = x.dim(0);
  x = num::reshape(x, {b, x.dim(1) * x.dim(2)});
  Tensor h = num::leaky_relu(proj_(num::concat({x, in.quotes}), phase));

  Tensor m = num::leaky_relu(dilated_(num::reshape(h, {b, 1, out_}), phase));
  for (std::size_t i = 0; i < circular_.size(); ++i) {
    m = circular_[i](m, phase);
    if (i + 1 < circular_.size()) m = num::leaky_relu(m);
  }
  return num::leaky_relu(num::add(h, num::reshape(m, {b, out_})));
}

GeneratorNet::GeneratorNet(const NetConfig& cfg, std::uint64_t init_seed) {
  cfg.validate();
  Rng init(init_seed);
  encoder_ = ConditionEncoder(store_, "enc.", cfg, init);
  std::int64_t width = cfg.enc_out + kSeedDim;
  for (std::size_t i = 0; i < cfg.gen_hidden.size(); ++i) {
    const std::string name = "hidden" + std::to_string(i);
    hidden_.emplace_back(store_, name, width, cfg.gen_hidden[i], init);
    norms_.emplace_back(store_, name + ".bn", cfg.gen_hidden[i]);
    width = cfg.gen_hidden[i];
  }
  head_ = num::Linear(store_, "head", width, kPolicyLogits, init);
}

Tensor GeneratorNet::logits_from_features(const Tensor& features, const Tensor& z, Phase phase) {
  Tensor x = num::concat({features, z});
  for (std::size_t i = 0; i < hidden_.size(); ++i) x = num::leaky_relu(norms_[i](hidden_[i](x, phase), phase));
  return head_(x, phase);
}

Tensor GeneratorNet::logits(const ConditionBatch& cond, const Tensor& z, Phase phase) {
  return logits_from_features(encoder_(cond, phase), z, phase);
}

Tensor class_bumps(const Tensor& f) {
  if (f.rank() != 2 || f.dim(1) != order::kOrderFeatures) {
    throw ShapeError("class_bumps: expected [batch,5], got " + num::shape_string(f.shape()));
  }
  constexpr int V = order::kNumValueClasses;
  const double scale = order::kMaxValueClass;
  const double inv_var = 1.0 / (kBumpWidth * kBumpWidth);
  const auto n = f.dim(0);
  std::vector<real> out(static_cast<std::size_t>(n * kPolicyLogits));
  for (std::int64_t b = 0; b < n; ++b) {
    const real* x = f.data().data() + b * order::kOrderFeatures;
    real* y = out.data() + b * kPolicyLogits;
    for (int j = 0; j < 3; ++j) y[j] = x[j];
    for (int head = 0; head < 2; ++head) {
      const double u = scale * x[3 + head];
      for (int k = 0; k < V; ++k) y[3 + head * V + k] = static_cast<real>(std::exp(-0.5 * (u - k) * (u - k) * inv_var));
    }
  }
  return num::make_result({n, kPolicyLogits}, std::move(out), {f}, [scale, inv_var](num::detail::Node& self) {
    auto& in = *self.inputs[0];
    auto& g = in.grad_buffer();
    const auto n = static_cast<std::int64_t>(in.shape[0]);
    for (std::int64_t b = 0; b < n; ++b) {
      const real* x = in.value.data() + b * order::kOrderFeatures;
      const real* y = self.value.data() + b * kPolicyLogits;
      const real* gy = self.grad.data() + b * kPolicyLogits;
      real* gx = g.data() + b * order::kOrderFeatures;
      for (int j = 0; j < 3; ++j) gx[j] += gy[j];
      for (int head = 0; head < 2; ++head) {
        const double u = scale * x[3 + head];
        double acc = 0.0;
        for (int k = 0; k < V; ++k) {
          const int c = 3 + head * V + k;
          acc += gy[c] * y[c] * (-(u - k) * inv_var * scale);
        }
        gx[3 + head] += static_cast<real>(acc);
      }
    }
  });
}

CriticNet::CriticNet(const NetConfig& cfg, std::uint64_t init_seed) {
  cfg.validate();
  Rng init(init_seed);
  encoder_ = ConditionEncoder(store_, "enc.", cfg, init);
  order_embed_ = num::Linear(store_, "order_embed", kPolicyLogits, cfg.critic_order_embed, init);
  std::int64_t width = cfg.enc_out + cfg.critic_order_embed;
  for (std::size_t i = 0; i < cfg.critic_hidden.size(); ++i) {
    hidden_.emplace_back(store_, "hidden" + std::to_string(i), width, cfg.critic_hidden[i], init);
    width = cfg.critic_hidden[i];
  }
  head_ = num::Linear(store_, "head", width, 1, init);
}

Tensor CriticNet::score(const ConditionBatch& cond, const Tensor& order_features, Phase phase) {
  if (order_features.rank() != 2 || order_features.dim(0) != cond.size() ||
      order_features.dim(1) != order::kOrderFeatures) {
    throw ShapeError("critic: order features " + num::shape_string(order_features.shape()) +
                     " do not match a batch of " + std::to_string(cond.size()));
  }
  Tensor e = encoder_(cond, phase);
  Tensor o = num::leaky_relu(order_embed_(class_bumps(order_features), phase));
  Tensor x = num::concat({e, o});
  for (auto& layer : hidden_) x = num::leaky_relu(layer(x, phase));
  Tensor s = head_(x, phase);
  return num::reshape(s, {s.dim(0)});
}

ContinuousGeneratorNet::ContinuousGeneratorNet(const NetConfig& cfg, std::uint64_t init_seed) {
  cfg.validate();
  Rng init(init_seed);
  encoder_ = ConditionEncoder(store_, "enc.", cfg, init);
  std::int64_t width = cfg.enc_out + kSeedDim;
  for (std::size_t i = 0; i < cfg.gen_hidden.size(); ++i) {
    const std::string name = "hidden" + std::to_string(i);
    hidden_.emplace_back(store_, name, width, cfg.gen_hidden[i], init);
    norms_.emplace_back(store_, name + ".bn", cfg.gen_hidden[i]);
    width = cfg.gen_hidden[i];
  }
  head_ = num::Linear(store_, "head", width, order::kOrderFeatures, init);
}

Tensor ContinuousGeneratorNet::features_from_encoding(const Tensor& enc, const Tensor& z, Phase phase) {
  Tensor x = num::concat({enc, z});
  for (std::size_t i = 0; i < hidden_.size(); ++i) x = num::leaky_relu(norms_[i](hidden_[i](x, phase), phase));
  return num::sigmoid(head_(x, phase));
}

Tensor ContinuousGeneratorNet::features(const ConditionBatch& cond, const Tensor& z, Phase phase) {
  return features_from_encoding(encoder_(cond, phase), z, phase);
}

std::array<double, order::kOrderFeatures> continuous_values(std::span<const real> features) {
  std::array<double, order::kOrderFeatures> v{};
  for (int i = 0; i < order::kOrderFeatures; ++i) v[i] = static_cast<double>(features[i]) * kContinuousScale[i];
  return v;
}

Tensor seed_batch(std::int64_t rows, Rng& rng) {
  std::vector<real> z(static_cast<std::size_t>(rows * kSeedDim));
  for (auto& v : z) v = static_cast<real>(rng.normal());
  return Tensor::from({rows, kSeedDim}, std::move(z));
}

Tensor order_feature_batch(std::span<const order::Order> orders) {
  const auto n = static_cast<std::int64_t>(orders.size());
  std::vector<real> f(static_cast<std::size_t>(n * order::kOrderFeatures));
  for (std::int64_t i = 0; i < n; ++i) {
    const auto of = order::order_features(orders[i]);
    for (int k = 0; k < order::kOrderFeatures; ++k) f[i * order::kOrderFeatures + k] = static_cast<real>(of[k]);
  }
  return Tensor::from({n, order::kOrderFeatures}, std::move(f));
}

}  // namespace pgsgan::gan::inline PGSGAN_PRECISION
