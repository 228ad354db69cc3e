#include "pgsgan/numcore/layers.hpp"

#include <cmath>

PGSGAN_NAMESPACE_BEGIN
namespace num {
namespace {

std::vector<real> uniform_init(std::int64_t n, double bound, Rng& rng) {
  std::vector<real> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = static_cast<real>((2.0 * rng.uniform() - 1.0) * bound);
  return v;
}

// Power-iteration warm-up at construction, so that an untrained layer used
// in eval phase already divides by a sensible estimate.
constexpr int kWarmupIterations = 15;

SpectralNormState register_sn(ParamStore& store, const std::string& name, const Tensor& weight, Rng& init) {
  const auto rows = weight.dim(0);
  const auto cols = weight.numel() / rows;
  SpectralNormState fresh = SpectralNormState::random(rows, cols, init);
  power_iteration(weight, fresh, kWarmupIterations);
  SpectralNormState s;
  s.u = store.add(name + ".sn_u", {rows}, {fresh.u.data().begin(), fresh.u.data().end()}, false);
  s.v = store.add(name + ".sn_v", {cols}, {fresh.v.data().begin(), fresh.v.data().end()}, false);
  return s;
}

}  // namespace

Linear::Linear(ParamStore& store, const std::string& name, std::int64_t in, std::int64_t out, Rng& init,
               bool spectral)
    : in_(in), out_(out), spectral_(spectral) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight_ = store.add(name + ".weight", {out, in}, uniform_init(out * in, bound, init), true);
  bias_ = store.add(name + ".bias", {out}, uniform_init(out, bound, init), true);
  if (spectral_) sn_ = register_sn(store, name, weight_, init);
}

Tensor Linear::effective_weight(Phase phase) {
  if (!spectral_) return weight_;
  return spectral_normalize(weight_, sn_, phase == Phase::train ? 1 : 0);
}

Tensor Linear::operator()(const Tensor& x, Phase phase) { return linear(x, effective_weight(phase), bias_); }

Conv1d::Conv1d(ParamStore& store, const std::string& name, std::int64_t in_ch, std::int64_t out_ch,
               int kernel, Conv1dSpec spec, Rng& init, bool spectral)
    : spec_(spec), spectral_(spectral) {
  const std::int64_t fan_in = in_ch * kernel;
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  weight_ = store.add(name + ".weight", {out_ch, in_ch, kernel}, uniform_init(out_ch * fan_in, bound, init), true);
  bias_ = store.add(name + ".bias", {out_ch}, uniform_init(out_ch, bound, init), true);
  if (spectral_) sn_ = register_sn(store, name, weight_, init);
}

Tensor Conv1d::operator()(const Tensor& x, Phase phase) {
  Tensor w = spectral_ ? spectral_normalize(weight_, sn_, phase == Phase::train ? 1 : 0) : weight_;
  return conv1d(x, w, bias_, spec_);
}

BatchNorm::BatchNorm(ParamStore& store, const std::string& name, std::int64_t features) {
  gamma_ = store.add(name + ".gamma", {features}, std::vector<real>(features, real(1)), true);
  beta_ = store.add(name + ".beta", {features}, std::vector<real>(features, real(0)), true);
  running_mean_ = store.add(name + ".running_mean", {features}, std::vector<real>(features, real(0)), false);
  running_var_ = store.add(name + ".running_var", {features}, std::vector<real>(features, real(1)), false);
}

Tensor BatchNorm::operator()(const Tensor& x, Phase phase) {
  return batch_norm(x, gamma_, beta_, running_mean_, running_var_, phase == Phase::train);
}

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, const Shape& shape) {
  const auto n = numel_of(shape);
  gamma_ = store.add(name + ".gamma", shape, std::vector<real>(n, real(1)), true);
  beta_ = store.add(name + ".beta", shape, std::vector<real>(n, real(0)), true);
}

Tensor LayerNorm::operator()(const Tensor& x) const { return layer_norm(x, gamma_, beta_); }

}  // namespace num
PGSGAN_NAMESPACE_END
