#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "acceptance.hpp"
#include "pgsgan/cli/commands.hpp"
#include "pgsgan/dataflow/synth.hpp"
#include "pgsgan/evalkit/evaluate.hpp"
#include "pgsgan/gan/trainer.hpp"

namespace fs = std::filesystem;

namespace acceptance {

using namespace pgsgan;

namespace {

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

struct Scratch {
  fs::path path;
  explicit Scratch(const std::string& name) : path(fs::temp_directory_path() / ("pgsgan_acceptance_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Scratch() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

Outcome end_to_end() {
  auto synth = data::SynthConfig::defaults();
  synth.num_orders = 50000;
  const auto market = data::synth_market(synth);
  const auto split = data::temporal_split(market.stream);
  const auto train = data::make_windows(split.train), valid = data::make_windows(split.valid);

  constexpr int kSeeds = 100;
  constexpr std::uint64_t kEvalSeed = 7;
  eval::UniformGenerator uniform;
  const auto ref = eval::evaluate_generator(uniform, valid, kSeeds, kEvalSeed, "uniform");

  gan::TrainConfig cfg;
  cfg.batch_size = 256;
  cfg.learning_rate = 1e-4;
  cfg.net_preset = "small";
  cfg.net = gan::NetConfig::small();
  cfg.validate_every = 0;
  cfg.checkpoint_every = 1000;
  cfg.seed = 1;

  Scratch dir("e2e");
  std::string trail;
  eval::EvalReport report;
  // Halfway and final evaluations; the second leg resumes from the first.
  for (std::int64_t steps : {500, 1000}) {
    cfg.max_generator_steps = steps;
    gan::Trainer trainer(cfg);
    gan::run_training(trainer, train, valid, dir.path, steps > 500);
    auto gen = trainer.evaluator();
    report = eval::evaluate_generator(*gen, valid, kSeeds, kEvalSeed, "pgsgan");
    trail += " | step " + std::to_string(trainer.generator_updates()) + ": kld " + fmt(report.kld) + " mse " +
             fmt(report.mse) + " entropy " + fmt(report.entropy_mean);
  }
  const double h_limit = std::log2(double(order::kNumClasses)) - 2.0;
  const bool ok = report.kld <= 0.5 * ref.kld && report.entropy_mean <= h_limit;
  return {ok, "uniform kld " + fmt(ref.kld) + " entropy " + fmt(ref.entropy_mean) + trail + " (need kld <= " +
                  fmt(0.5 * ref.kld) + ", entropy <= " + fmt(h_limit) + ")"};
}

Outcome determinism() {
  Scratch dir("determinism");
  auto pipeline = [&](const std::string& name) -> std::string {
    const auto root = dir.path / name;
    std::ostringstream out, err;
    const std::vector<std::vector<std::string>> steps = {
        {"synth", "--num_orders=3000", "--seed=11", "--output_dir=" + (root / "data").string(), "--name=orders"},
        {"train", "--data=" + (root / "data/orders.csv").string(), "--output_dir=" + (root / "run").string(),
         "--net=small", "--batch_size=64", "--max_epochs=3", "--learning_rate=0.0001", "--seed=5",
         "--valid_seeds=2"},
        {"evaluate", "--checkpoint=" + (root / "run").string(), "--data=" + (root / "data/orders.csv").string(),
         "--output_dir=" + (root / "eval").string(), "--n_seeds=5", "--seed=9"},
    };
    for (const auto& args : steps) {
      if (cli::run(args, out, err) != cli::kOk) return "`" + args[0] + "` failed: " + err.str();
    }
    return {};
  };
  for (const char* name : {"a", "b"}) {
    if (auto e = pipeline(name); !e.empty()) return {false, e};
  }
  const std::vector<std::string> files = {"data/orders.csv", "run/train_log.csv", "run/valid_log.csv",
                                          "run/checkpoint.pgsg", "eval/report.txt", "eval/hist_price.csv",
                                          "eval/hist_volume.csv"};
  std::size_t bytes = 0;
  for (const auto& f : files) {
    const auto a = slurp(dir.path / "a" / f), b = slurp(dir.path / "b" / f);
    if (a.empty()) return {false, f + " is missing or empty"};
    if (a != b) return {false, f + " differs between runs"};
    bytes += a.size();
  }
  return {true, "synth -> train 3 epochs -> evaluate twice: " + std::to_string(files.size()) + " files, " +
                    std::to_string(bytes) + " bytes identical"};
}

}  // namespace acceptance

int main(int argc, char** argv) {
  using acceptance::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"by-chance-constants", acceptance::by_chance_constants},
      {"gradient-correctness", acceptance::gradient_correctness},
      {"spectral-normalization", acceptance::spectral_normalization},
      {"reinforce-oracle", acceptance::reinforce_oracle},
      {"metric-oracles", acceptance::metric_oracles},
      {"end-to-end-training", acceptance::end_to_end},
      {"hinge-saturation", acceptance::hinge_saturation},
      {"discreteness", acceptance::discreteness},
      {"determinism", acceptance::determinism},
  };
  // Optional arguments select criteria by name.
  const std::vector<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !r.pass;
    std::cout << (r.pass ? "PASS " : "FAIL ") << name << " (" << std::fixed << std::setprecision(1) << secs
              << " s): " << r.detail << std::endl;
    std::cout.unsetf(std::ios::fixed);
  }
  return failed == 0 ? 0 : 1;
}
