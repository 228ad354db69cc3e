#include "pgsgan/dataflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pgsgan/errors.hpp"
#include "pgsgan/rng.hpp"

namespace pgsgan::data {
namespace {

using order::kMaxValueClass;
using order::kNumClasses;
using order::kNumValueClasses;

int bucket_of(int spread) { return std::min(spread, 3) - 1; }

// Order class plus its effect on the spread, enumerated for one state.
struct Outcome {
  double prob;
  order::Order order;
  int next_spread;
  // -1: the bid moves down / ask moves up (MO); +1: the own best improves.
  int quote_move;
};

std::vector<Outcome> enumerate_outcomes(const SynthConfig& c, int last_side, int spread) {
  const int idx = last_side * 3 + bucket_of(spread);
  std::vector<Outcome> out;
  for (int side = 0; side < 2; ++side) {
    const double ps = side ? c.p_buy[idx] : 1.0 - c.p_buy[idx];
    if (ps <= 0) continue;
    for (int action = 0; action < 2; ++action) {
      const double pa = action ? c.p_cancel[idx] : 1.0 - c.p_cancel[idx];
      if (pa <= 0) continue;
      for (int mo = 0; mo < 2; ++mo) {
        const double pm = action ? (mo ? 0.0 : 1.0) : (mo ? c.p_mo[idx] : 1.0 - c.p_mo[idx]);
        if (pm <= 0) continue;
        const double head = ps * pa * pm;
        for (int v = 0; v < kNumValueClasses; ++v) {
          const double pv = c.volume_probs[v];
          if (pv <= 0) continue;
          if (mo) {
            out.push_back({head * pv, {side, action, 1, 0, v},
                           std::min(spread + 1, c.max_spread), -1});
            continue;
          }
          for (int d = 0; d < kNumValueClasses; ++d) {
            const double pd = c.depth_probs[d];
            if (pd <= 0) continue;
            int price = 0;
            int next = spread;
            int move = 0;
            if (action == 1) {
              price = spread + d;
            } else if (d == 0) {
              if (spread >= 2) {
                price = spread - 1;
                next = spread - 1;
                move = 1;
              } else {
                price = spread;
              }
            } else {
              price = spread + d - 1;
            }
            out.push_back({head * pv * pd, {side, action, 0, std::min(price, kMaxValueClass), v},
                           next, move});
          }
        }
      }
    }
  }
  return out;
}

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DataError(std::string("synth config: ") + name + " entry outside [0,1]: " +
                    std::to_string(p));
  }
}

void check_table(const std::vector<double>& t, const char* name) {
  if (t.size() != static_cast<std::size_t>(kNumValueClasses)) {
    throw DataError(std::string("synth config: ") + name + " must have 40 entries");
  }
  for (double p : t) check_prob(p, name);
  const double s = std::accumulate(t.begin(), t.end(), 0.0);
  if (std::abs(s - 1.0) > 1e-9) {
    throw DataError(std::string("synth config: ") + name + " sums to " + std::to_string(s) +
                    ", not 1");
  }
}

std::array<double, 6> six(const KeyValues& kv, const std::string& key, std::array<double, 6> d) {
  if (!kv.contains(key)) return d;
  const auto v = kv.get_doubles(key);
  if (v.size() != 6) throw UsageError("synth config: `" + key + "` needs 6 comma-separated values");
  std::copy(v.begin(), v.end(), d.begin());
  return d;
}

std::string join(const auto& values) {
  std::string s;
  for (double v : values) {
    if (!s.empty()) s += ',';
    s += format_double(v);
  }
  return s;
}

}  // namespace

std::vector<double> truncated_geometric(double decay, int first) {
  std::vector<double> p(kNumValueClasses, 0.0);
  double w = 1.0;
  for (int k = first; k < kNumValueClasses; ++k) {
    p[k] = w;
    w *= decay;
  }
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= s;
  return p;
}

SynthConfig SynthConfig::defaults() {
  SynthConfig c;
  c.depth_probs = truncated_geometric(0.55);
  auto vol = truncated_geometric(0.6, 1);
  vol[5] += 0.04;
  vol[10] += 0.03;
  const double s = std::accumulate(vol.begin(), vol.end(), 0.0);
  for (double& x : vol) x /= s;
  c.volume_probs = vol;
  return c;
}

SynthConfig SynthConfig::from_kv(const KeyValues& kv) {
  kv.require_known({"num_orders", "seed", "max_spread", "initial_spread", "tick_size",
                    "min_volume_unit", "initial_bid", "instrument", "p_buy", "p_cancel", "p_mo",
                    "depth_probs", "volume_probs", "depth_decay", "volume_decay"},
                   "synth config");
  SynthConfig c = defaults();
  c.num_orders = kv.get_int_or("num_orders", c.num_orders);
  c.seed = kv.get_u64_or("seed", c.seed);
  c.max_spread = static_cast<int>(kv.get_int_or("max_spread", c.max_spread));
  c.initial_spread = static_cast<int>(kv.get_int_or("initial_spread", c.initial_spread));
  c.tick_size = kv.get_double_or("tick_size", c.tick_size);
  c.min_volume_unit = kv.get_double_or("min_volume_unit", c.min_volume_unit);
  c.initial_bid = kv.get_double_or("initial_bid", c.initial_bid);
  c.instrument = kv.get_or("instrument", c.instrument);
  c.p_buy = six(kv, "p_buy", c.p_buy);
  c.p_cancel = six(kv, "p_cancel", c.p_cancel);
  c.p_mo = six(kv, "p_mo", c.p_mo);
  if (kv.contains("depth_probs")) {
    c.depth_probs = kv.get_doubles("depth_probs");
  } else if (kv.contains("depth_decay")) {
    c.depth_probs = truncated_geometric(kv.get_double("depth_decay"));
  }
  if (kv.contains("volume_probs")) {
    c.volume_probs = kv.get_doubles("volume_probs");
  } else if (kv.contains("volume_decay")) {
    c.volume_probs = truncated_geometric(kv.get_double("volume_decay"), 1);
  }
  return c;
}

KeyValues SynthConfig::to_kv() const {
  KeyValues kv;
  kv.set("num_orders", num_orders);
  kv.set("seed", seed);
  kv.set("max_spread", max_spread);
  kv.set("initial_spread", initial_spread);
  kv.set("tick_size", tick_size);
  kv.set("min_volume_unit", min_volume_unit);
  kv.set("initial_bid", initial_bid);
  kv.set("instrument", instrument);
  kv.set("p_buy", join(p_buy));
  kv.set("p_cancel", join(p_cancel));
  kv.set("p_mo", join(p_mo));
  kv.set("depth_probs", join(depth_probs));
  kv.set("volume_probs", join(volume_probs));
  return kv;
}

void SynthConfig::validate() const {
  if (num_orders < 0) throw DataError("synth config: num_orders must be non-negative");
  if (max_spread < 1 || max_spread > kMaxValueClass) {
    throw DataError("synth config: max_spread must lie in [1, 39]");
  }
  if (initial_spread < 1 || initial_spread > max_spread) {
    throw DataError("synth config: initial_spread must lie in [1, max_spread]");
  }
  if (!(tick_size > 0) || !(min_volume_unit > 0)) {
    throw DataError("synth config: tick_size and min_volume_unit must be positive");
  }
  if (!(initial_bid > tick_size * 1000)) {
    throw DataError("synth config: initial_bid must exceed 1000 ticks");
  }
  for (double p : p_buy) check_prob(p, "p_buy");
  for (double p : p_cancel) check_prob(p, "p_cancel");
  for (double p : p_mo) check_prob(p, "p_mo");
  check_table(depth_probs, "depth_probs");
  check_table(volume_probs, "volume_probs");
}

std::vector<double> synth_ground_truth(const SynthConfig& c) {
  c.validate();
  const int n_states = 2 * c.max_spread;
  auto state_id = [&](int side, int spread) { return side * c.max_spread + (spread - 1); };

  std::vector<std::vector<Outcome>> outcomes(n_states);
  std::vector<double> transition(static_cast<std::size_t>(n_states) * n_states, 0.0);
  for (int side = 0; side < 2; ++side) {
    for (int s = 1; s <= c.max_spread; ++s) {
      const int from = state_id(side, s);
      outcomes[from] = enumerate_outcomes(c, side, s);
      for (const auto& o : outcomes[from]) {
        transition[from * n_states + state_id(o.order.side, o.next_spread)] += o.prob;
      }
    }
  }

  // Lazy power iteration from the initial state: converges to the stationary
  // law of the initial state's closed class even for periodic chains.
  std::vector<double> pi(n_states, 0.0), next(n_states);
  pi[state_id(0, c.initial_spread)] = 1.0;
  for (int it = 0; it < 1000000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < n_states; ++i) {
      if (pi[i] == 0.0) continue;
      for (int j = 0; j < n_states; ++j) next[j] += pi[i] * transition[i * n_states + j];
    }
    double change = 0.0;
    for (int j = 0; j < n_states; ++j) {
      next[j] = 0.5 * (pi[j] + next[j]);
      change += std::abs(next[j] - pi[j]);
    }
    pi.swap(next);
    if (change < 1e-15) break;
  }

  std::vector<double> dist(kNumClasses, 0.0);
  for (int i = 0; i < n_states; ++i) {
    for (const auto& o : outcomes[i]) dist[order::class_index(o.order)] += pi[i] * o.prob;
  }
  const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
  for (double& p : dist) p /= total;
  return dist;
}

SynthResult synth_market(const SynthConfig& c) {
  c.validate();
  SynthResult result;
  result.ground_truth = synth_ground_truth(c);

  OrderStream& stream = result.stream;
  stream.meta = {c.tick_size, c.min_volume_unit, c.instrument};
  stream.seq.reserve(c.num_orders);
  stream.orders.reserve(c.num_orders);
  stream.source_rows.reserve(c.num_orders);

  Rng rng = Rng::derive(c.seed, "synth:orders");
  std::array<std::vector<std::vector<Outcome>>, 2> table;
  for (int side = 0; side < 2; ++side) {
    table[side].resize(c.max_spread + 1);
    for (int s = 1; s <= c.max_spread; ++s) table[side][s] = enumerate_outcomes(c, side, s);
  }
  std::array<std::vector<std::vector<double>>, 2> probs;
  for (int side = 0; side < 2; ++side) {
    probs[side].resize(c.max_spread + 1);
    for (int s = 1; s <= c.max_spread; ++s) {
      for (const auto& o : table[side][s]) probs[side][s].push_back(o.prob);
    }
  }

  // Quotes are tracked in integer ticks.
  std::int64_t bid = std::llround(c.initial_bid / c.tick_size);
  std::int64_t ask = bid + c.initial_spread;
  int last_side = 0;
  for (std::int64_t i = 0; i < c.num_orders; ++i) {
    const int spread = static_cast<int>(ask - bid);
    const auto& opts = table[last_side][spread];
    const Outcome& pick = opts[rng.categorical(probs[last_side][spread])];
    const order::Order& o = pick.order;

    order::RawOrder raw;
    raw.side = o.side;
    raw.action = o.action;
    raw.is_mo = o.is_mo;
    raw.best_bid = bid * c.tick_size;
    raw.best_ask = ask * c.tick_size;
    raw.tick_size = c.tick_size;
    raw.min_volume_unit = c.min_volume_unit;
    raw.raw_volume = o.volume_class * c.min_volume_unit;
    const std::int64_t opposite = o.side ? ask : bid;
    const std::int64_t price_ticks = o.side ? opposite - o.price_class : opposite + o.price_class;
    raw.raw_price = price_ticks * c.tick_size;
    stream.push_back(i + 1, raw);

    if (pick.quote_move < 0) {
      // MO consumes the touched quote.
      if (o.side) {
        ++ask;
        if (ask - bid > c.max_spread) ++bid;
      } else {
        --bid;
        if (ask - bid > c.max_spread) --ask;
      }
    } else if (pick.quote_move > 0) {
      if (o.side) {
        ++bid;
      } else {
        --ask;
      }
    }
    last_side = o.side;
  }
  return result;
}

void save_distribution(const std::vector<double>& dist, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << "class,side,action,is_mo,price_class,volume_class,probability\n";
  for (int k = 0; k < kNumClasses; ++k) {
    const auto o = order::order_of_index(k);
    out << k << ',' << o.side << ',' << o.action << ',' << o.is_mo << ',' << o.price_class << ','
        << o.volume_class << ',' << format_double(dist[k]) << '\n';
  }
  if (!out) throw UsageError("write failed: " + path.string());
}

std::vector<double> load_distribution(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<double> dist(kNumClasses, 0.0);
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    std::istringstream ls(line);
    std::string f;
    std::vector<std::string> fields;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != 7) throw DataError(path.string() + ": row " + std::to_string(row) + " malformed");
    const int k = std::stoi(fields[0]);
    if (k < 0 || k >= kNumClasses) throw DataError(path.string() + ": class out of range");
    dist[k] = std::stod(fields[6]);
  }
  return dist;
}

}  // namespace pgsgan::data
