#include "pgsgan/cli/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>

#include "pgsgan/dataflow/synth.hpp"
#include "pgsgan/errors.hpp"
#include "pgsgan/evalkit/curves.hpp"
#include "pgsgan/evalkit/evaluate.hpp"
#include "pgsgan/gan/trainer.hpp"

namespace pgsgan::cli {
namespace fs = std::filesystem;

namespace {

struct Invocation {
  std::string command;
  KeyValues kv;
};

// `--key=value` pairs after an optional config file; flags win over the file.
KeyValues collect(const std::string& config_path, const std::vector<std::string>& extras) {
  KeyValues kv;
  if (!config_path.empty()) {
    if (!fs::exists(config_path)) throw UsageError("config file not found: " + config_path);
    kv = KeyValues::load(config_path);
  }
  KeyValues flags;
  for (const auto& arg : extras) {
    const auto eq = arg.find('=');
    if (arg.rfind("--", 0) != 0 || eq == std::string::npos || eq == 2) {
      throw UsageError("unexpected argument `" + arg + "` (overrides look like --key=value)");
    }
    flags.set(arg.substr(2, eq - 2), arg.substr(eq + 1));
  }
  kv.merge(flags);
  return kv;
}

KeyValues subset(const KeyValues& kv, const std::set<std::string>& keys) {
  KeyValues out;
  for (const auto& [k, v] : kv.entries()) {
    if (keys.count(k)) out.set(k, v);
  }
  return out;
}

fs::path output_dir(const KeyValues& kv) {
  fs::path dir = kv.get_or("output_dir", "");
  if (dir.empty()) throw UsageError("missing required key `output_dir`");
  if (const char* root = std::getenv(kOutputRootEnv); root && *root && dir.is_relative()) dir = fs::path(root) / dir;
  return dir;
}

fs::path existing_file(const KeyValues& kv, const std::string& key) {
  if (!kv.contains(key)) throw UsageError("missing required key `" + key + "`");
  fs::path p = kv.get(key);
  if (!fs::exists(p)) throw DataError(key + " not found: " + p.string());
  return p;
}

bool parse_bool(const KeyValues& kv, const std::string& key, bool fallback) {
  const auto v = kv.get_or(key, fallback ? "true" : "false");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("config key `" + key + "` must be true or false, got `" + v + "`");
}

int positive_int(const KeyValues& kv, const std::string& key, std::int64_t fallback) {
  const auto v = kv.get_int_or(key, fallback);
  if (v < 1 || v > 1'000'000) throw UsageError("config key `" + key + "` must be in [1, 1000000]");
  return static_cast<int>(v);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
  const auto probe = dir / ".pgsgan_write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw DataError("output directory is not writable: " + dir.string());
  }
  fs::remove(probe, ec);
}

// synth: SynthConfig keys plus output_dir and name.
int cmd_synth(const KeyValues& kv, std::ostream& out) {
  std::set<std::string> synth_keys = {"num_orders", "seed", "max_spread", "initial_spread", "tick_size",
                                      "min_volume_unit", "initial_bid", "instrument", "p_buy", "p_cancel",
                                      "p_mo", "depth_probs", "volume_probs", "depth_decay", "volume_decay"};
  std::set<std::string> allowed = synth_keys;
  allowed.insert({"output_dir", "name"});
  kv.require_known(allowed, "synth");
  const auto dir = output_dir(kv);
  const auto name = kv.get_or("name", "orders");
  data::SynthConfig cfg;
  try {
    cfg = data::SynthConfig::from_kv(subset(kv, synth_keys));
    cfg.validate();
  } catch (const DataError& e) {
    throw UsageError(std::string("synth config: ") + e.what());
  }

  ensure_dir(dir);
  const auto result = data::synth_market(cfg);
  const auto csv = dir / (name + ".csv");
  data::save_orders(result.stream, csv);
  data::save_distribution(result.ground_truth, dir / (name + "_truth.csv"));
  cfg.to_kv().save(dir / (name + "_synth.cfg"), "synthetic market configuration");
  out << "wrote " << result.stream.size() << " orders to " << csv.string() << '\n';
  return kOk;
}

std::set<std::string> train_keys() {
  std::set<std::string> k;
  for (const auto& key : gan::TrainConfig::keys()) k.insert(key);
  return k;
}

// train: TrainConfig keys plus data, output_dir and resume.
int cmd_train(const KeyValues& kv, std::ostream& out, std::ostream& err) {
  auto allowed = train_keys();
  allowed.insert({"data", "output_dir", "resume"});
  kv.require_known(allowed, "train");
  const auto cfg = gan::TrainConfig::from_kv(subset(kv, train_keys()));
  const auto dir = output_dir(kv);
  const bool resume = parse_bool(kv, "resume", false);
  const auto data_path = existing_file(kv, "data");

  const auto split = data::temporal_split(data::load_orders(data_path));
  const auto train = data::make_windows(split.train);
  const auto valid = split.valid.size() > order::kHistoryLength ? data::make_windows(split.valid)
                                                                 : std::vector<data::Window>{};
  if (train.size() < cfg.batch_size) {
    throw DataError("training split has " + std::to_string(train.size()) + " windows, fewer than batch_size " +
                    std::to_string(cfg.batch_size));
  }
  ensure_dir(dir);
  gan::Trainer trainer(cfg);
  const auto r = gan::run_training(trainer, train, valid, dir, resume, &err);
  out << "trained " << r.epochs_completed << " epochs, " << r.generator_updates << " generator steps; outputs in "
      << dir.string() << '\n';
  return kOk;
}

std::vector<data::Window> windows_of(const KeyValues& kv) {
  const auto stream = data::load_orders(existing_file(kv, "data"));
  const auto which = kv.get_or("split", "test");
  data::OrderStream part;
  if (which == "all") {
    part = stream;
  } else {
    const auto split = data::temporal_split(stream);
    if (which == "train") part = split.train;
    else if (which == "valid") part = split.valid;
    else if (which == "test") part = split.test;
    else throw UsageError("split must be train, valid, test or all, got `" + which + "`");
  }
  if (part.size() <= order::kHistoryLength) {
    throw DataError("the " + which + " split has no situations (needs more than " +
                    std::to_string(order::kHistoryLength) + " orders)");
  }
  auto w = data::make_windows(part);
  const auto cap = kv.get_int_or("max_situations", 0);
  if (cap < 0) throw UsageError("config key `max_situations` must be non-negative");
  if (cap > 0 && static_cast<std::size_t>(cap) < w.size()) w.resize(static_cast<std::size_t>(cap));
  return w;
}

// generate: checkpoint, data, split, n_seeds, seed, max_situations, output_dir.
int cmd_generate(const KeyValues& kv, std::ostream& out) {
  kv.require_known({"checkpoint", "data", "split", "n_seeds", "seed", "max_situations", "output_dir"}, "generate");
  const auto dir = output_dir(kv);
  const int n_seeds = positive_int(kv, "n_seeds", 100);
  const auto seed = kv.get_u64_or("seed", 1);
  if (!kv.contains("checkpoint")) throw UsageError("missing required key `checkpoint`");
  auto trainer = gan::Trainer::from_checkpoint(kv.get("checkpoint"));
  const auto windows = windows_of(kv);

  ensure_dir(dir);
  auto gen = trainer.evaluator();
  const auto path = dir / "generated.csv";
  const auto tmp = dir / "generated.csv.tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    f << "situation,seed_index,side,action,is_mo,price_class,volume_class\n";
    eval::Draws d;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      Rng rng = Rng::derive(seed, "eval:situation:" + std::to_string(i));
      d = {};
      gen->draw(windows[i].condition, windows[i].target, n_seeds, rng, d);
      for (int s = 0; s < n_seeds; ++s) {
        const auto& o = d.orders[s];
        o.validate();
        f << i << ',' << s << ',' << o.side << ',' << o.action << ',' << o.is_mo << ',' << o.price_class << ','
          << o.volume_class << '\n';
      }
    }
    if (!f) throw DataError("failed writing " + path.string());
  }
  fs::rename(tmp, path);
  out << "wrote " << windows.size() * static_cast<std::size_t>(n_seeds) << " orders to " << path.string() << '\n';
  return kOk;
}

// evaluate: generator (checkpoint | uniform), checkpoint, data, split,
// n_seeds, seed, max_situations, output_dir.
int cmd_evaluate(const KeyValues& kv, std::ostream& out) {
  kv.require_known({"generator", "checkpoint", "data", "split", "n_seeds", "seed", "max_situations", "output_dir"},
                   "evaluate");
  const auto dir = output_dir(kv);
  const int n_seeds = positive_int(kv, "n_seeds", 100);
  const auto seed = kv.get_u64_or("seed", 1);
  const auto kind = kv.get_or("generator", "checkpoint");
  if (kind != "checkpoint" && kind != "uniform") throw UsageError("generator must be checkpoint or uniform");
  std::optional<gan::Trainer> trainer;
  if (kind == "checkpoint") {
    if (!kv.contains("checkpoint")) throw UsageError("missing required key `checkpoint`");
    trainer.emplace(gan::Trainer::from_checkpoint(kv.get("checkpoint")));
  }
  const auto windows = windows_of(kv);

  ensure_dir(dir);
  std::unique_ptr<eval::OrderGenerator> gen;
  std::string variant = "uniform";
  if (trainer) {
    gen = trainer->evaluator();
    variant = gan::to_string(trainer->config().variant);
  } else {
    gen = std::make_unique<eval::UniformGenerator>();
  }
  const auto report = eval::evaluate_generator(*gen, windows, n_seeds, seed, variant);
  report.write(dir);
  out << "kld " << format_double(report.kld) << " mse " << format_double(report.mse);
  if (report.has_policy) {
    out << " nll_mean " << format_double(report.nll_mean) << " entropy_mean " << format_double(report.entropy_mean);
  }
  out << "\nreport written to " << (dir / "report.txt").string() << '\n';
  return kOk;
}

// report: log_dir (holding train_log.csv, optionally valid_log.csv), output_dir.
int cmd_report(const KeyValues& kv, std::ostream& out) {
  kv.require_known({"log_dir", "output_dir"}, "report");
  const auto dir = output_dir(kv);
  if (!kv.contains("log_dir")) throw UsageError("missing required key `log_dir`");
  const fs::path logs = kv.get("log_dir");
  const auto step_path = logs / gan::kStepLogFile;
  if (!fs::exists(step_path)) throw DataError("metric log not found: " + step_path.string());
  const auto steps = eval::read_step_log(step_path);
  std::vector<eval::ValidationMetrics> valid;
  if (const auto vp = logs / gan::kValidLogFile; fs::exists(vp)) valid = eval::read_valid_log(vp);

  ensure_dir(dir);
  const auto curves = eval::learning_curves(steps, valid);
  eval::write_curves(curves, dir);
  out << "wrote " << curves.series.size() << " curves over " << curves.epochs.size() << " epochs to "
      << dir.string() << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete-policy GAN for next-order generation"};
  app.name("pgsgan");
  app.require_subcommand(1);
  std::string config_path;
  std::string train_list = "data, output_dir, resume";
  for (const auto& k : gan::TrainConfig::keys()) train_list += ", " + k;
  struct Command {
    std::string name, help, keys;
  };
  const std::vector<Command> commands = {
      {"synth", "Simulate a synthetic order stream with its exact class distribution",
       "output_dir, name, num_orders, seed, max_spread, initial_spread, tick_size, min_volume_unit, initial_bid, "
       "instrument, p_buy, p_cancel, p_mo, depth_probs, volume_probs, depth_decay, volume_decay"},
      {"train", "Train a generator and critic on an order stream",
       train_list},
      {"generate", "Sample orders for each situation of an order stream",
       "checkpoint, data, split, n_seeds, seed, max_situations, output_dir"},
      {"evaluate", "Score a generator against real next orders (KLD, MSE, NLL, entropy)",
       "generator, checkpoint, data, split, n_seeds, seed, max_situations, output_dir"},
      {"report", "Turn training logs into per-epoch learning-curve CSVs", "log_dir, output_dir"}};
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("-c,--config", config_path, "Key-value config file");
    sub->allow_extras();
    sub->footer("Config keys, each also accepted as --key=value:\n  " + c.keys);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto selected = app.get_subcommands();
    out << (selected.empty() ? app.help() : selected.front()->help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "pgsgan: " << e.what() << '\n';
    return kUsage;
  }

  auto* sub = app.get_subcommands().front();
  try {
    const auto kv = collect(config_path, sub->remaining());
    const auto& name = sub->get_name();
    if (name == "synth") return cmd_synth(kv, out);
    if (name == "train") return cmd_train(kv, out, err);
    if (name == "generate") return cmd_generate(kv, out);
    if (name == "evaluate") return cmd_evaluate(kv, out);
    return cmd_report(kv, out);
  } catch (const UsageError& e) {
    err << "pgsgan " << sub->get_name() << ": " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "pgsgan " << sub->get_name() << ": numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "pgsgan " << sub->get_name() << ": " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace pgsgan::cli
