#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pgsgan::eval {

// One row of the per-step training log:
//   epoch,step,loss_c,loss_g,nll_real_mean,entropy_mean
struct StepMetrics {
  std::int64_t epoch = 0;
  std::int64_t step = 0;
  double loss_c = 0.0;
  double loss_g = 0.0;
  double nll_real_mean = 0.0;
  double entropy_mean = 0.0;
};

// One row of the per-epoch validation log: epoch,kld,mse,nll_mean,entropy_mean
struct ValidationMetrics {
  std::int64_t epoch = 0;
  double kld = 0.0;
  double mse = 0.0;
  double nll_mean = 0.0;
  double entropy_mean = 0.0;
};

inline constexpr const char* kStepLogHeader = "epoch,step,loss_c,loss_g,nll_real_mean,entropy_mean";
inline constexpr const char* kValidLogHeader = "epoch,kld,mse,nll_mean,entropy_mean";

std::string format_step_row(const StepMetrics& m);
std::string format_valid_row(const ValidationMetrics& m);

// Throw DataError naming the offending line.
std::vector<StepMetrics> read_step_log(const std::filesystem::path& path);
std::vector<ValidationMetrics> read_valid_log(const std::filesystem::path& path);

// Per-epoch means of the step log, joined with validation rows by epoch.
struct LearningCurves {
  std::vector<std::int64_t> epochs;
  std::map<std::string, std::vector<double>> series;  // loss_c, loss_g, nll, entropy, [kld, mse, nll_valid, entropy_valid]
  double nll_by_chance = 0.0;
  double entropy_by_chance = 0.0;
};

LearningCurves learning_curves(const std::vector<StepMetrics>& steps,
                               const std::vector<ValidationMetrics>& valid = {});

// curve_<metric>.csv per series: `epoch,value[,by_chance]`, the by-chance
// column present for nll and entropy series.
void write_curves(const LearningCurves& curves, const std::filesystem::path& dir);

}  // namespace pgsgan::eval
