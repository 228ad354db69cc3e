#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pgsgan/checkpoint.hpp"
#include "pgsgan/dataflow/stream.hpp"
#include "pgsgan/evalkit/evaluate.hpp"
#include "pgsgan/gan/nets.hpp"
#include "pgsgan/gan/objective.hpp"
#include "pgsgan/kvfile.hpp"
#include "pgsgan/numcore/adam.hpp"

namespace pgsgan::gan::inline PGSGAN_PRECISION {

enum class Variant { pgsgan, pgsgan_hl, dcgan_baseline };
std::string to_string(Variant v);
Variant parse_variant(const std::string& s);  // pgsgan | pgsgan-hl | dcgan-baseline
LossVariant loss_of(Variant v);

struct TrainConfig {
  std::size_t batch_size = 2048;
  double learning_rate = 1e-5;
  std::int64_t max_epochs = 5000;
  std::int64_t max_generator_steps = 0;  // 0 = no limit
  int critic_steps = 5;                  // critic updates per generator update
  Variant variant = Variant::pgsgan;
  std::uint64_t seed = 1;
  std::int64_t checkpoint_every = 1;  // epochs
  std::int64_t validate_every = 1;    // epochs, 0 = never
  int valid_seeds = 10;
  std::size_t valid_max_situations = 0;  // 0 = every validation window
  std::string net_preset = "standard";   // standard | small
  NetConfig net;

  LossVariant loss() const { return loss_of(variant); }
  // UsageError on non-positive sizes or rates.
  void validate() const;
  // Recognized keys; `net` selects a preset and `net.*` override it.
  static std::vector<std::string> keys();
  static TrainConfig from_kv(const KeyValues& kv);
  KeyValues to_kv() const;
};

struct CycleMetrics {
  double loss_c = 0.0;  // mean over the cycle's critic updates
  double loss_g = 0.0;
  double nll_real_mean = 0.0;  // nats; NaN for the continuous baseline
  double entropy_mean = 0.0;   // bits; NaN for the continuous baseline
};

// Generator, critic and their optimizers. Noise for seeds and sampling
// comes from one stream derived from the config seed.
class Trainer {
 public:
  explicit Trainer(TrainConfig config);

  const TrainConfig& config() const { return config_; }
  // critic_steps critic updates on `batch`, each against fresh fake
  // samples, then one generator update on the same conditions.
  // Throws NumericalError on a non-finite loss, logit or gradient.
  CycleMetrics train_step(std::span<const data::Window* const> batch);

  std::uint64_t critic_updates() const { return critic_updates_; }
  std::uint64_t generator_updates() const { return generator_updates_; }

  bool has_policy() const { return policy_ != nullptr; }
  GeneratorNet& policy_generator();
  ContinuousGeneratorNet& continuous_generator();
  CriticNet& critic() { return *critic_; }
  num::ParamStore& generator_params();
  Rng& noise() { return noise_; }
  std::unique_ptr<eval::OrderGenerator> evaluator();

  std::vector<CheckpointRecord> checkpoint_records() const;
  // Config plus loop state: optimizer step counts and the noise stream.
  KeyValues manifest() const;
  void restore(const std::vector<CheckpointRecord>& records, const KeyValues& manifest);

  // Loads a generator saved by run_training; config comes from the manifest.
  static Trainer from_checkpoint(const std::filesystem::path& dir);

 private:
  std::vector<double> score_batch(const ConditionBatch& cond, const Tensor& features);
  CycleMetrics policy_step(std::span<const data::Window* const> batch);
  CycleMetrics continuous_step(std::span<const data::Window* const> batch);

  TrainConfig config_;
  std::unique_ptr<GeneratorNet> policy_;
  std::unique_ptr<ContinuousGeneratorNet> continuous_;
  std::unique_ptr<CriticNet> critic_;
  num::Adam adam_g_, adam_c_;
  Rng noise_;
  std::uint64_t critic_updates_ = 0, generator_updates_ = 0;
};

inline constexpr const char* kStepLogFile = "train_log.csv";
inline constexpr const char* kValidLogFile = "valid_log.csv";
inline constexpr const char* kCheckpointFile = "checkpoint.pgsg";
inline constexpr const char* kManifestFile = "checkpoint.manifest";
inline constexpr const char* kAbortCheckpointFile = "checkpoint_abort.pgsg";
inline constexpr const char* kAbortManifestFile = "checkpoint_abort.manifest";

struct RunResult {
  std::int64_t epochs_completed = 0;
  std::uint64_t generator_updates = 0;
};

// Epoch = one pass of train_step over the shuffled training batches.
// Writes the step log, the validation log and a checkpoint every
// `checkpoint_every` epochs and at the end. With `resume`, continues from
// the checkpoint in `out_dir`, trimming log rows written after it. On a
// numerical failure writes the abort checkpoint and rethrows.
RunResult run_training(Trainer& trainer, std::span<const data::Window> train, std::span<const data::Window> valid,
                       const std::filesystem::path& out_dir, bool resume, std::ostream* progress = nullptr);

}  // namespace pgsgan::gan::inline PGSGAN_PRECISION
