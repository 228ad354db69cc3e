#include "pgsgan/gan/trainer.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "pgsgan/dataflow/batcher.hpp"
#include "pgsgan/errors.hpp"
#include "pgsgan/evalkit/curves.hpp"
#include "pgsgan/numcore/ops.hpp"

namespace pgsgan::gan::inline PGSGAN_PRECISION {
namespace fs = std::filesystem;

std::string to_string(Variant v) {
  switch (v) {
    case Variant::pgsgan: return "pgsgan";
    case Variant::pgsgan_hl: return "pgsgan-hl";
    case Variant::dcgan_baseline: return "dcgan-baseline";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "pgsgan") return Variant::pgsgan;
  if (s == "pgsgan-hl") return Variant::pgsgan_hl;
  if (s == "dcgan-baseline") return Variant::dcgan_baseline;
  throw UsageError("unknown variant `" + s + "` (expected pgsgan, pgsgan-hl or dcgan-baseline)");
}

LossVariant loss_of(Variant v) { return v == Variant::pgsgan_hl ? LossVariant::hinge : LossVariant::plain; }

void TrainConfig::validate() const {
  if (batch_size < 2) throw UsageError("batch_size must be at least 2");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw UsageError("learning_rate must be positive");
  if (max_epochs < 1) throw UsageError("max_epochs must be positive");
  if (max_generator_steps < 0) throw UsageError("max_generator_steps must be non-negative");
  if (critic_steps < 1) throw UsageError("critic_steps must be positive");
  if (checkpoint_every < 1) throw UsageError("checkpoint_every must be positive");
  if (validate_every < 0) throw UsageError("validate_every must be non-negative");
  if (valid_seeds < 1) throw UsageError("valid_seeds must be positive");
  if (net_preset != "standard" && net_preset != "small") {
    throw UsageError("net must be `standard` or `small`, got `" + net_preset + "`");
  }
  net.validate();
}

std::vector<std::string> TrainConfig::keys() {
  std::vector<std::string> k = {"batch_size",     "learning_rate",    "max_epochs",  "max_generator_steps",
                                "critic_steps",   "variant",          "seed",        "checkpoint_every",
                                "validate_every", "valid_seeds",      "valid_max_situations", "net"};
  for (auto& n : NetConfig::keys()) k.push_back(n);
  return k;
}

TrainConfig TrainConfig::from_kv(const KeyValues& kv) {
  TrainConfig c;
  auto non_negative = [&](const char* key, std::int64_t fallback) {
    const auto v = kv.get_int_or(key, fallback);
    if (v < 0) throw UsageError(std::string("config key `") + key + "` must be non-negative");
    return v;
  };
  c.batch_size = static_cast<std::size_t>(non_negative("batch_size", static_cast<std::int64_t>(c.batch_size)));
  c.learning_rate = kv.get_double_or("learning_rate", c.learning_rate);
  c.max_epochs = kv.get_int_or("max_epochs", c.max_epochs);
  c.max_generator_steps = kv.get_int_or("max_generator_steps", c.max_generator_steps);
  c.critic_steps = static_cast<int>(kv.get_int_or("critic_steps", c.critic_steps));
  c.variant = parse_variant(kv.get_or("variant", to_string(c.variant)));
  c.seed = kv.get_u64_or("seed", c.seed);
  c.checkpoint_every = kv.get_int_or("checkpoint_every", c.checkpoint_every);
  c.validate_every = kv.get_int_or("validate_every", c.validate_every);
  c.valid_seeds = static_cast<int>(kv.get_int_or("valid_seeds", c.valid_seeds));
  c.valid_max_situations = static_cast<std::size_t>(non_negative("valid_max_situations", 0));
  c.net_preset = kv.get_or("net", c.net_preset);
  c.net = c.net_preset == "small" ? NetConfig::small() : NetConfig::standard();
  c.net.apply(kv);
  c.validate();
  return c;
}

KeyValues TrainConfig::to_kv() const {
  KeyValues kv;
  kv.set("batch_size", static_cast<std::uint64_t>(batch_size));
  kv.set("learning_rate", learning_rate);
  kv.set("max_epochs", max_epochs);
  kv.set("max_generator_steps", max_generator_steps);
  kv.set("critic_steps", critic_steps);
  kv.set("variant", to_string(variant));
  kv.set("seed", seed);
  kv.set("checkpoint_every", checkpoint_every);
  kv.set("validate_every", validate_every);
  kv.set("valid_seeds", valid_seeds);
  kv.set("valid_max_situations", static_cast<std::uint64_t>(valid_max_situations));
  kv.set("net", net_preset);
  net.store(kv);
  return kv;
}

namespace {

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw NumericalError("non-finite " + what);
}

void require_finite(const Tensor& t, const std::string& what) {
  for (real v : t.data()) {
    if (!std::isfinite(v)) throw NumericalError("non-finite " + what);
  }
}

// Stacks two [n,5] feature blocks into [2n,5]; used without gradients.
Tensor stack_rows(const Tensor& a, const Tensor& b) {
  std::vector<real> v(a.data().begin(), a.data().end());
  v.insert(v.end(), b.data().begin(), b.data().end());
  return Tensor::from({a.dim(0) + b.dim(0), a.dim(1)}, std::move(v));
}

}  // namespace

Trainer::Trainer(TrainConfig config)
    : config_(std::move(config)),
      adam_g_(num::AdamConfig{config_.learning_rate}),
      adam_c_(num::AdamConfig{config_.learning_rate}),
      noise_(Rng::derive(config_.seed, "train:noise")) {
  config_.validate();
  const auto gen_seed = Rng::derive_seed(config_.seed, "init:generator");
  if (config_.variant == Variant::dcgan_baseline) {
    continuous_ = std::make_unique<ContinuousGeneratorNet>(config_.net, gen_seed);
  } else {
    policy_ = std::make_unique<GeneratorNet>(config_.net, gen_seed);
  }
  critic_ = std::make_unique<CriticNet>(config_.net, Rng::derive_seed(config_.seed, "init:critic"));
}

GeneratorNet& Trainer::policy_generator() {
  if (!policy_) throw UsageError("variant " + to_string(config_.variant) + " has no policy generator");
  return *policy_;
}

ContinuousGeneratorNet& Trainer::continuous_generator() {
  if (!continuous_) throw UsageError("variant " + to_string(config_.variant) + " has no continuous generator");
  return *continuous_;
}

num::ParamStore& Trainer::generator_params() { return policy_ ? policy_->params() : continuous_->params(); }

std::unique_ptr<eval::OrderGenerator> Trainer::evaluator() {
  if (policy_) return std::make_unique<eval::PolicyGenerator>(*policy_);
  return std::make_unique<eval::ContinuousGenerator>(*continuous_);
}

std::vector<double> Trainer::score_batch(const ConditionBatch& cond, const Tensor& features) {
  num::NoGradGuard guard;
  const Tensor s = critic_->score(cond, features, Phase::train);
  require_finite(s, "critic score");
  return {s.data().begin(), s.data().end()};
}

CycleMetrics Trainer::train_step(std::span<const data::Window* const> batch) {
  if (batch.size() < 2) throw std::invalid_argument("train_step: batch needs at least 2 windows");
  return policy_ ? policy_step(batch) : continuous_step(batch);
}

CycleMetrics Trainer::policy_step(std::span<const data::Window* const> batch) {
  const auto n = static_cast<std::int64_t>(batch.size());
  std::vector<const order::Condition*> conds, conds2;
  std::vector<order::Order> real;
  for (const auto* w : batch) {
    conds.push_back(&w->condition);
    real.push_back(w->target);
  }
  conds2 = conds;
  conds2.insert(conds2.end(), conds.begin(), conds.end());
  const auto cond = condition_batch(std::span<const order::Condition* const>(conds));
  const auto cond2 = condition_batch(std::span<const order::Condition* const>(conds2));

  CycleMetrics m;
  for (int k = 0; k < config_.critic_steps; ++k) {
    std::vector<order::Order> both = real;
    {
      num::NoGradGuard guard;
      const Tensor logits = policy_->logits(cond, seed_batch(n, noise_), Phase::train);
      require_finite(logits, "generator logits");
      for (const auto& p : policies_of(logits)) both.push_back(sample_order(p, noise_).emitted);
    }
    critic_->params().zero_grad();
    const Tensor scores = num::reshape(critic_->score(cond2, order_feature_batch(both), Phase::train), {1, 2 * n});
    const Tensor loss =
        critic_loss(num::slice_cols(scores, n, 2 * n), num::slice_cols(scores, 0, n), config_.loss());
    require_finite(loss.item(), "critic loss");
    num::backward(loss);
    adam_c_.step(critic_->params());
    ++critic_updates_;
    m.loss_c += loss.item();
  }
  m.loss_c /= config_.critic_steps;

  policy_->params().zero_grad();
  const Tensor logits = policy_->logits(cond, seed_batch(n, noise_), Phase::train);
  require_finite(logits, "generator logits");
  const auto policies = policies_of(logits);
  std::vector<order::Order> fake;
  std::vector<Choice> choices;
  for (const auto& p : policies) {
    const auto s = sample_order(p, noise_);
    fake.push_back(s.emitted);
    choices.push_back(choice_of(s));
  }
  const auto weights = generator_weights(score_batch(cond, order_feature_batch(fake)), config_.loss());
  const Tensor loss = weighted_nll_loss(policy_nll(logits, choices), weights);
  require_finite(loss.item(), "generator loss");
  num::backward(loss);
  adam_g_.step(policy_->params());
  ++generator_updates_;
  m.loss_g = loss.item();

  for (std::size_t i = 0; i < policies.size(); ++i) {
    m.nll_real_mean += nll(policies[i], real[i]);
    m.entropy_mean += entropy_bits(policies[i]);
  }
  m.nll_real_mean /= static_cast<double>(policies.size());
  m.entropy_mean /= static_cast<double>(policies.size());
  return m;
}

CycleMetrics Trainer::continuous_step(std::span<const data::Window* const> batch) {
  const auto n = static_cast<std::int64_t>(batch.size());
  std::vector<const order::Condition*> conds, conds2;
  std::vector<order::Order> targets;
  for (const auto* w : batch) {
    conds.push_back(&w->condition);
    targets.push_back(w->target);
  }
  conds2 = conds;
  conds2.insert(conds2.end(), conds.begin(), conds.end());
  const auto cond = condition_batch(std::span<const order::Condition* const>(conds));
  const auto cond2 = condition_batch(std::span<const order::Condition* const>(conds2));
  const Tensor real_features = order_feature_batch(targets);

  CycleMetrics m;
  for (int k = 0; k < config_.critic_steps; ++k) {
    Tensor fake;
    {
      num::NoGradGuard guard;
      fake = continuous_->features(cond, seed_batch(n, noise_), Phase::train);
      require_finite(fake, "generator output");
    }
    critic_->params().zero_grad();
    const Tensor scores =
        num::reshape(critic_->score(cond2, stack_rows(real_features, fake), Phase::train), {1, 2 * n});
    const Tensor loss = critic_loss(num::slice_cols(scores, n, 2 * n), num::slice_cols(scores, 0, n), LossVariant::plain);
    require_finite(loss.item(), "critic loss");
    num::backward(loss);
    adam_c_.step(critic_->params());
    ++critic_updates_;
    m.loss_c += loss.item();
  }
  m.loss_c /= config_.critic_steps;

  continuous_->params().zero_grad();
  const Tensor fake = continuous_->features(cond, seed_batch(n, noise_), Phase::train);
  require_finite(fake, "generator output");
  const Tensor loss = num::scale(num::mean(critic_->score(cond, fake, Phase::train)), real(-1));
  require_finite(loss.item(), "generator loss");
  num::backward(loss);
  critic_->params().zero_grad();
  adam_g_.step(continuous_->params());
  ++generator_updates_;
  m.loss_g = loss.item();
  m.nll_real_mean = std::nan("");
  m.entropy_mean = std::nan("");
  return m;
}

std::vector<CheckpointRecord> Trainer::checkpoint_records() const {
  const auto& gen = policy_ ? policy_->params() : continuous_->params();
  auto out = gen.to_records("generator/");
  auto critic = critic_->params().to_records("critic/");
  out.insert(out.end(), critic.begin(), critic.end());
  for (auto&& r : adam_g_.to_records("adam_g/")) out.push_back(std::move(r));
  for (auto&& r : adam_c_.to_records("adam_c/")) out.push_back(std::move(r));
  return out;
}

KeyValues Trainer::manifest() const {
  KeyValues kv = config_.to_kv();
  kv.set("loss_formula", to_string(config_.loss()));
  kv.set("state.critic_updates", critic_updates_);
  kv.set("state.generator_updates", generator_updates_);
  kv.set("state.adam_g_steps", adam_g_.step_count());
  kv.set("state.adam_c_steps", adam_c_.step_count());
  kv.set("state.rng_noise", noise_.state());
  return kv;
}

void Trainer::restore(const std::vector<CheckpointRecord>& records, const KeyValues& manifest) {
  generator_params().load_records(records, "generator/");
  critic_->params().load_records(records, "critic/");
  adam_g_.load_records(records, "adam_g/", generator_params(), manifest.get_u64_or("state.adam_g_steps", 0));
  adam_c_.load_records(records, "adam_c/", critic_->params(), manifest.get_u64_or("state.adam_c_steps", 0));
  if (manifest.contains("state.rng_noise")) noise_.restore(manifest.get("state.rng_noise"));
  critic_updates_ = manifest.get_u64_or("state.critic_updates", 0);
  generator_updates_ = manifest.get_u64_or("state.generator_updates", 0);
}

Trainer Trainer::from_checkpoint(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestFile, ckpt_path = dir / kCheckpointFile;
  if (!fs::exists(manifest_path) || !fs::exists(ckpt_path)) {
    throw DataError("no checkpoint in " + dir.string() + " (expected " + kCheckpointFile + " and " +
                    kManifestFile + ")");
  }
  const auto manifest = KeyValues::load(manifest_path);
  Trainer t(TrainConfig::from_kv(manifest));
  t.restore(read_checkpoint(ckpt_path), manifest);
  return t;
}

namespace {

void save_state(Trainer& t, const fs::path& ckpt, const fs::path& manifest_path, std::int64_t epoch) {
  write_checkpoint(ckpt, t.checkpoint_records());
  auto kv = t.manifest();
  kv.set("state.epoch", epoch);
  kv.save(manifest_path, "training checkpoint manifest");
}

// Keeps the header and rows whose leading epoch field is <= `epoch`.
void trim_log(const fs::path& path, const char* header, std::int64_t epoch) {
  std::vector<std::string> keep = {header};
  if (std::ifstream in(path); in) {
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (std::stoll(line.substr(0, line.find(','))) <= epoch) keep.push_back(line);
    }
  }
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : keep) out << l << '\n';
}

void check_resumable(const TrainConfig& now, const KeyValues& saved) {
  const auto current = now.to_kv();
  for (const auto& [key, value] : current.entries()) {
    if (key == "max_epochs" || key == "max_generator_steps" || key == "checkpoint_every") continue;
    if (!saved.contains(key) || saved.get(key) != value) {
      throw UsageError("cannot resume: config key `" + key + "` differs from the checkpoint");
    }
  }
}

}  // namespace

RunResult run_training(Trainer& trainer, std::span<const data::Window> train, std::span<const data::Window> valid,
                       const fs::path& out_dir, bool resume, std::ostream* progress) {
  const auto& cfg = trainer.config();
  if (train.size() < cfg.batch_size) {
    throw DataError("training set has " + std::to_string(train.size()) + " windows, fewer than batch_size " +
                    std::to_string(cfg.batch_size));
  }
  fs::create_directories(out_dir);
  const fs::path step_path = out_dir / kStepLogFile, valid_path = out_dir / kValidLogFile;
  const fs::path ckpt = out_dir / kCheckpointFile, manifest_path = out_dir / kManifestFile;

  RunResult result;
  if (resume && fs::exists(ckpt) && fs::exists(manifest_path)) {
    const auto manifest = KeyValues::load(manifest_path);
    check_resumable(cfg, manifest);
    trainer.restore(read_checkpoint(ckpt), manifest);
    result.epochs_completed = manifest.get_int("state.epoch");
    trim_log(step_path, eval::kStepLogHeader, result.epochs_completed);
    trim_log(valid_path, eval::kValidLogHeader, result.epochs_completed);
  } else {
    trim_log(step_path, eval::kStepLogHeader, -1);
    trim_log(valid_path, eval::kValidLogHeader, -1);
  }
  std::ofstream step_log(step_path, std::ios::app), valid_log(valid_path, std::ios::app);
  if (!step_log || !valid_log) throw DataError("cannot write logs under " + out_dir.string());
  if (progress) {
    *progress << "variant " << to_string(cfg.variant) << ", loss formula " << to_string(cfg.loss()) << '\n';
  }

  const data::Batcher batcher(train.size(), cfg.batch_size, Rng::derive_seed(cfg.seed, "batcher"));
  auto step_limit_reached = [&] {
    return cfg.max_generator_steps > 0 &&
           trainer.generator_updates() >= static_cast<std::uint64_t>(cfg.max_generator_steps);
  };
  std::int64_t last_saved = result.epochs_completed;
  for (std::int64_t e = result.epochs_completed + 1; e <= cfg.max_epochs && !step_limit_reached(); ++e) {
    for (const auto& idx : batcher.epoch(static_cast<std::uint64_t>(e))) {
      if (step_limit_reached()) break;
      std::vector<const data::Window*> batch;
      batch.reserve(idx.size());
      for (auto i : idx) batch.push_back(&train[i]);
      CycleMetrics m;
      try {
        m = trainer.train_step(batch);
      } catch (const NumericalError& err) {
        step_log.flush();
        valid_log.flush();
        save_state(trainer, out_dir / kAbortCheckpointFile, out_dir / kAbortManifestFile, e - 1);
        throw NumericalError(std::string(err.what()) + " at epoch " + std::to_string(e) + ", generator step " +
                             std::to_string(trainer.generator_updates() + 1) + "; state saved to " +
                             (out_dir / kAbortCheckpointFile).string());
      }
      step_log << eval::format_step_row({e, static_cast<std::int64_t>(trainer.generator_updates()), m.loss_c,
                                         m.loss_g, m.nll_real_mean, m.entropy_mean})
               << '\n';
    }
    if (cfg.validate_every > 0 && e % cfg.validate_every == 0 && !valid.empty()) {
      const auto n = cfg.valid_max_situations ? std::min(cfg.valid_max_situations, valid.size()) : valid.size();
      auto gen = trainer.evaluator();
      const auto r = eval::evaluate_generator(*gen, valid.subspan(0, n), cfg.valid_seeds,
                                              Rng::derive_seed(cfg.seed, "valid:epoch:" + std::to_string(e)));
      const double na = std::nan("");
      valid_log << eval::format_valid_row({e, r.kld, r.mse, r.has_policy ? r.nll_mean : na,
                                           r.has_policy ? r.entropy_mean : na})
                << '\n';
      if (progress) {
        *progress << "epoch " << e << ": generator steps " << trainer.generator_updates() << ", valid kld "
                  << format_double(r.kld) << ", entropy " << format_double(r.entropy_mean) << '\n';
      }
    } else if (progress) {
      *progress << "epoch " << e << ": generator steps " << trainer.generator_updates() << '\n';
    }
    step_log.flush();
    valid_log.flush();
    result.epochs_completed = e;
    if (e % cfg.checkpoint_every == 0) {
      save_state(trainer, ckpt, manifest_path, e);
      last_saved = e;
    }
  }
  if (last_saved != result.epochs_completed || !fs::exists(ckpt)) {
    save_state(trainer, ckpt, manifest_path, result.epochs_completed);
  }
  result.generator_updates = trainer.generator_updates();
  return result;
}

}  // namespace pgsgan::gan::inline PGSGAN_PRECISION
