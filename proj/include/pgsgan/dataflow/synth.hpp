#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "pgsgan/dataflow/stream.hpp"
#include "pgsgan/kvfile.hpp"

namespace pgsgan::data {

// Zero-intelligence order emitter over a small Markov market state
// (side of the previous order, spread in ticks).
//
// Per order, with state (last_side, spread) and
// bucket = min(spread, 3) - 1, idx = last_side * 3 + bucket:
//   side   ~ Bernoulli(p_buy[idx])
//   action ~ Bernoulli(p_cancel[idx])
//   is_mo  ~ Bernoulli(p_mo[idx])       (new orders only; cancels are never MO)
//   volume class ~ volume table
//   MO:     price class 0; the touched quote moves one tick away
//           (spread + 1, capped at max_spread by shifting both quotes).
//   new:    depth d ~ depth table. d == 0 improves the own best by one tick
//           when spread >= 2 (price class spread - 1, spread - 1), otherwise
//           joins it (price class spread). d >= 1 rests at spread + d - 1.
//   cancel: depth d ~ depth table, price class spread + d. Quotes unchanged.
// Price classes are ticks from the opposite best quote, clipped to 39.
struct SynthConfig {
  std::int64_t num_orders = 50000;
  std::uint64_t seed = 1;
  int max_spread = 6;
  int initial_spread = 1;
  double tick_size = 1.0;
  double min_volume_unit = 100.0;
  double initial_bid = 100000.0;
  std::string instrument = "SYNTH";

  std::array<double, 6> p_buy{0.62, 0.55, 0.45, 0.38, 0.45, 0.55};
  std::array<double, 6> p_cancel{0.35, 0.30, 0.20, 0.35, 0.30, 0.20};
  std::array<double, 6> p_mo{0.04, 0.08, 0.12, 0.04, 0.08, 0.12};

  // Probabilities for depth 0..39 and volume class 0..39.
  std::vector<double> depth_probs;
  std::vector<double> volume_probs;

  // Defaults: depth ~ truncated geometric(0.55); volume ~ 1 + truncated
  // geometric(0.6) with bumps at round lots 5 and 10.
  static SynthConfig defaults();
  // Keys are the field names; arrays are comma separated. Missing table keys
  // fall back to depth_decay / volume_decay truncated geometrics.
  static SynthConfig from_kv(const KeyValues& kv);
  KeyValues to_kv() const;

  // Throws DataError when a table does not sum to 1 within 1e-9 or a
  // probability leaves [0, 1].
  void validate() const;
};

// P(k) proportional to decay^k on [first, 39].
std::vector<double> truncated_geometric(double decay, int first = 0);

struct SynthResult {
  OrderStream stream;
  // Long-run class distribution over the 12,800-class space, by enumeration
  // over the Markov state chain.
  std::vector<double> ground_truth;
};

SynthResult synth_market(const SynthConfig& config);

// Exact stationary class distribution of the configured process.
std::vector<double> synth_ground_truth(const SynthConfig& config);

// `class,side,action,is_mo,price_class,volume_class,probability`, all 12,800 rows.
void save_distribution(const std::vector<double>& dist, const std::filesystem::path& path);
std::vector<double> load_distribution(const std::filesystem::path& path);

}  // namespace pgsgan::data
