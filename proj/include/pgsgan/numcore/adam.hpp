#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pgsgan/numcore/param_store.hpp"

PGSGAN_NAMESPACE_BEGIN
namespace num {

struct AdamConfig {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction over the trainable tensors of one store.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Applies one update from the accumulated gradients. A non-finite gradient
  // anywhere rejects the whole step (nothing is modified) with NumericalError.
  void step(ParamStore& params);

  std::uint64_t step_count() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

  // Moments as checkpoint records `<prefix>m/<name>`, `<prefix>v/<name>`.
  std::vector<CheckpointRecord> to_records(const std::string& prefix) const;
  void load_records(const std::vector<CheckpointRecord>& records, const std::string& prefix,
                    const ParamStore& params, std::uint64_t step_count);

 private:
  struct Moments {
    std::vector<real> m, v;
  };
  AdamConfig config_;
  std::uint64_t steps_ = 0;
  std::vector<std::string> order_;
  std::unordered_map<std::string, Moments> moments_;
};

}  // namespace num
PGSGAN_NAMESPACE_END
