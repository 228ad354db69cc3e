#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pgsgan/gan/policy.hpp"
#include "pgsgan/kvfile.hpp"
#include "pgsgan/numcore/layers.hpp"
#include "pgsgan/orderdomain/order.hpp"

namespace pgsgan::gan::inline PGSGAN_PRECISION {

using num::Phase;
using num::Tensor;

// Layer widths shared by the generator, the critic and the continuous
// baseline. The condition encoder has three conv stages over the 20-step
// axis (20, 10 and 5 steps, average pooling in between), a linear
// projection of the pooled history joined with the current quotes, and a
// mixing stage: one dilated conv followed by circular convs.
struct NetConfig {
  int enc_channels = 32;
  int enc_convs_per_stage = 3;
  int enc_out = 64;
  int mix_channels = 8;
  int mix_circular = 4;
  std::vector<int> gen_hidden = {224, 160, 96};
  int critic_order_embed = 32;
  std::vector<int> critic_hidden = {256, 128, 64};

  // Full-size defaults: 14 conv and 5 linear layers in the generator.
  static NetConfig standard() { return {}; }
  // Narrow variant for CPU-scale runs and gradient checks.
  static NetConfig small();

  void validate() const;  // UsageError on non-positive widths
  // Keys prefixed `net.`; absent keys keep the current value.
  void apply(const KeyValues& kv);
  void store(KeyValues& kv) const;
  static std::vector<std::string> keys();
};

// Network inputs for a batch of conditions: history [B,7,20] (channels are
// the seven features, length is time) and quotes [B,2].
struct ConditionBatch {
  Tensor history;
  Tensor quotes;
  std::int64_t size() const { return history.dim(0); }
};
ConditionBatch condition_batch(std::span<const order::Condition* const> conds);
ConditionBatch condition_batch(std::span<const order::Condition> conds);

class ConditionEncoder {
 public:
  ConditionEncoder() = default;
  ConditionEncoder(num::ParamStore& store, const std::string& prefix, const NetConfig& cfg, Rng& init);
  Tensor operator()(const ConditionBatch& in, Phase phase);
  std::int64_t out_features() const { return out_; }

 private:
  struct ConvBlock {
    num::Conv1d conv;
    num::LayerNorm norm;
  };
  std::vector<std::vector<ConvBlock>> stages_;
  num::Linear proj_;
  num::Conv1d dilated_;
  std::vector<num::Conv1d> circular_;
  std::int64_t out_ = 0;
};

// Condition + seed z[B,128] -> policy logits [B,83].
class GeneratorNet {
 public:
  GeneratorNet(const NetConfig& cfg, std::uint64_t init_seed);
  Tensor logits(const ConditionBatch& cond, const Tensor& z, Phase phase);
  // Encoder output computed once, reused across many seeds.
  Tensor encode(const ConditionBatch& cond, Phase phase) { return encoder_(cond, phase); }
  Tensor logits_from_features(const Tensor& features, const Tensor& z, Phase phase);

  num::ParamStore& params() { return store_; }
  const num::ParamStore& params() const { return store_; }

 private:
  num::ParamStore store_;
  ConditionEncoder encoder_;
  std::vector<num::Linear> hidden_;
  std::vector<num::BatchNorm> norms_;
  num::Linear head_;
};

// Fixed feature map for the critic's order input: the three binaries pass
// through, price and volume (x = class/39) each become 40 Gaussian bumps
// exp(-(39x - k)^2 / (2 * 0.5^2)), k = 0..39. [B,5] -> [B,83].
// Differentiable, so gradients still reach a continuous generator.
Tensor class_bumps(const Tensor& order_features);
inline constexpr double kBumpWidth = 0.5;

// Condition + order features [B,5] (the order_features convention, values
// in [0,1]) -> scores [B].
class CriticNet {
 public:
  CriticNet(const NetConfig& cfg, std::uint64_t init_seed);
  Tensor score(const ConditionBatch& cond, const Tensor& order_features, Phase phase);

  num::ParamStore& params() { return store_; }
  const num::ParamStore& params() const { return store_; }

 private:
  num::ParamStore store_;
  ConditionEncoder encoder_;
  num::Linear order_embed_;
  std::vector<num::Linear> hidden_;
  num::Linear head_;
};

// DCGAN-style generator: the generator trunk with a 5-unit sigmoid head.
// features() is in [0,1]^5 and feeds the critic directly; values() rescales
// price and volume to [0,39].
class ContinuousGeneratorNet {
 public:
  ContinuousGeneratorNet(const NetConfig& cfg, std::uint64_t init_seed);
  Tensor features(const ConditionBatch& cond, const Tensor& z, Phase phase);
  Tensor features_from_encoding(const Tensor& enc, const Tensor& z, Phase phase);
  Tensor encode(const ConditionBatch& cond, Phase phase) { return encoder_(cond, phase); }

  num::ParamStore& params() { return store_; }
  const num::ParamStore& params() const { return store_; }

 private:
  num::ParamStore store_;
  ConditionEncoder encoder_;
  std::vector<num::Linear> hidden_;
  std::vector<num::BatchNorm> norms_;
  num::Linear head_;
};

inline constexpr std::array<double, order::kOrderFeatures> kContinuousScale = {1.0, 1.0, 1.0, 39.0, 39.0};
std::array<double, order::kOrderFeatures> continuous_values(std::span<const real> features);

// Standard-normal seeds [rows,128].
Tensor seed_batch(std::int64_t rows, Rng& rng);
// Order features [B,5] for a batch of orders.
Tensor order_feature_batch(std::span<const order::Order> orders);

}  // namespace pgsgan::gan::inline PGSGAN_PRECISION
