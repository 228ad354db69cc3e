#pragma once

#include <string>

#include "pgsgan/numcore/ops.hpp"
#include "pgsgan/numcore/param_store.hpp"
#include "pgsgan/numcore/spectral_norm.hpp"
#include "pgsgan/rng.hpp"

PGSGAN_NAMESPACE_BEGIN
namespace num {

// train: batch statistics, and spectrally normalized weights advance their
// power iteration on every forward. eval: running statistics, frozen vectors.
enum class Phase { train, eval };

// Parameters are registered in the store under `name.weight`, `name.bias`
// and, with spectral normalization, buffers `name.sn_u` / `name.sn_v`.
// Initialization: uniform in +-1/sqrt(fan_in).
class Linear {
 public:
  Linear() = default;
  Linear(ParamStore& store, const std::string& name, std::int64_t in, std::int64_t out, Rng& init,
         bool spectral = true);
  Tensor operator()(const Tensor& x, Phase phase);
  // Weight as used by the forward pass (normalized when spectral).
  Tensor effective_weight(Phase phase);

  std::int64_t in_features() const { return in_; }
  std::int64_t out_features() const { return out_; }

 private:
  std::int64_t in_ = 0, out_ = 0;
  bool spectral_ = true;
  Tensor weight_, bias_;
  SpectralNormState sn_;
};

class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(ParamStore& store, const std::string& name, std::int64_t in_ch, std::int64_t out_ch, int kernel,
         Conv1dSpec spec, Rng& init, bool spectral = true);
  Tensor operator()(const Tensor& x, Phase phase);

 private:
  Conv1dSpec spec_;
  bool spectral_ = true;
  Tensor weight_, bias_;
  SpectralNormState sn_;
};

class BatchNorm {
 public:
  BatchNorm() = default;
  BatchNorm(ParamStore& store, const std::string& name, std::int64_t features);
  Tensor operator()(const Tensor& x, Phase phase);

 private:
  Tensor gamma_, beta_, running_mean_, running_var_;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  // `shape` is the per-sample shape being normalized.
  LayerNorm(ParamStore& store, const std::string& name, const Shape& shape);
  Tensor operator()(const Tensor& x) const;

 private:
  Tensor gamma_, beta_;
};

}  // namespace num
PGSGAN_NAMESPACE_END
