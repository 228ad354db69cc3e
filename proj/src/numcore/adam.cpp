#include "pgsgan/numcore/adam.hpp"

#include <cmath>

#include "pgsgan/errors.hpp"

PGSGAN_NAMESPACE_BEGIN
namespace num {

void Adam::step(ParamStore& params) {
  const auto names = params.trainable_names();
  std::vector<std::vector<real>> grads;
  grads.reserve(names.size());
  for (const auto& n : names) {
    grads.push_back(params.get(n).grad());
    for (real g : grads.back()) {
      if (!std::isfinite(g)) throw NumericalError("adam: non-finite gradient in `" + n + "`");
    }
  }

  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < names.size(); ++k) {
    Tensor p = params.get(names[k]);
    auto [it, fresh] = moments_.try_emplace(names[k]);
    if (fresh) {
      order_.push_back(names[k]);
      it->second.m.assign(p.numel(), real(0));
      it->second.v.assign(p.numel(), real(0));
    }
    auto& mo = it->second;
    auto data = p.mutable_data();
    const auto& g = grads[k];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double m = config_.beta1 * mo.m[i] + (1.0 - config_.beta1) * g[i];
      const double v = config_.beta2 * mo.v[i] + (1.0 - config_.beta2) * static_cast<double>(g[i]) * g[i];
      mo.m[i] = static_cast<real>(m);
      mo.v[i] = static_cast<real>(v);
      data[i] = static_cast<real>(data[i] - config_.learning_rate * (m / c1) / (std::sqrt(v / c2) + config_.epsilon));
    }
  }
}

std::vector<CheckpointRecord> Adam::to_records(const std::string& prefix) const {
  std::vector<CheckpointRecord> out;
  for (const auto& n : order_) {
    const auto& mo = moments_.at(n);
    for (const auto& [tag, vec] : {std::pair{"m/", &mo.m}, std::pair{"v/", &mo.v}}) {
      CheckpointRecord r;
      r.name = prefix + tag + n;
      r.dims = {vec->size()};
      r.values = *vec;
      out.push_back(std::move(r));
    }
  }
  return out;
}

void Adam::load_records(const std::vector<CheckpointRecord>& records, const std::string& prefix,
                        const ParamStore& params, std::uint64_t step_count) {
  moments_.clear();
  order_.clear();
  std::unordered_map<std::string, const CheckpointRecord*> by_name;
  for (const auto& r : records) by_name[r.name] = &r;
  auto take = [&](const std::string& key, std::size_t n) {
    auto it = by_name.find(key);
    if (it == by_name.end()) return std::vector<real>();
    std::vector<real> out;
    std::visit([&](const auto& src) { out.assign(src.begin(), src.end()); }, it->second->values);
    if (out.size() != n) throw DataError("optimizer state `" + key + "` has the wrong size");
    return out;
  };
  for (const auto& n : params.trainable_names()) {
    const auto size = static_cast<std::size_t>(params.get(n).numel());
    auto m = take(prefix + "m/" + n, size);
    auto v = take(prefix + "v/" + n, size);
    if (m.empty() != v.empty()) throw DataError("optimizer state for `" + n + "` is incomplete");
    if (m.empty()) continue;
    order_.push_back(n);
    moments_[n] = Moments{std::move(m), std::move(v)};
  }
  steps_ = step_count;
}

}  // namespace num
PGSGAN_NAMESPACE_END
