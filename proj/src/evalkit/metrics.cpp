#include "pgsgan/evalkit/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pgsgan/errors.hpp"

namespace pgsgan::eval {
namespace {

void require_same_size(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("distribution sizes differ");
}

}  // namespace

ClassDistribution ClassDistribution::from_probs(std::vector<double> probs, std::uint64_t sample_count) {
  if (probs.size() != static_cast<std::size_t>(order::kNumClasses)) {
    throw std::invalid_argument("ClassDistribution: expected 12800 probabilities");
  }
  double s = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("ClassDistribution: negative or NaN probability");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9) {
    throw std::invalid_argument("ClassDistribution: probabilities sum to " + std::to_string(s));
  }
  ClassDistribution d;
  d.probs = std::move(probs);
  d.sample_count = sample_count == 0 ? 1 : sample_count;
  return d;
}

ClassDistribution empirical_distribution(std::span<const order::Order> orders) {
  std::vector<std::uint64_t> counts(order::kNumClasses, 0);
  for (const auto& o : orders) ++counts[order::class_index(o)];
  return distribution_from_counts(counts);
}

ClassDistribution distribution_from_counts(std::span<const std::uint64_t> counts) {
  ClassDistribution d;
  const std::uint64_t n = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (n == 0) return d;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    d.probs[k] = static_cast<double>(counts[k]) / static_cast<double>(n);
  }
  d.sample_count = n;
  return d;
}

double kld_bits(std::span<const double> p, std::span<const double> q) {
  require_same_size(p, q);
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log2(p[i] / q[i]);
  }
  // Rounding can leave a tiny negative value for P == Q.
  return d < 0.0 ? 0.0 : d;
}

double kld_bits(const ClassDistribution& p, const ClassDistribution& q) {
  return kld_bits(p.probs, q.probs);
}

double mse(std::span<const double> p, std::span<const double> q) {
  require_same_size(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    s += d * d;
  }
  return s / static_cast<double>(p.size());
}

double mse(const ClassDistribution& p, const ClassDistribution& q) { return mse(p.probs, q.probs); }

double total_variation(std::span<const double> p, std::span<const double> q) {
  require_same_size(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double entropy_bits(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

Marginals marginals(std::span<const std::uint64_t> class_counts) {
  Marginals m;
  for (int k = 0; k < order::kNumClasses; ++k) {
    const std::uint64_t c = class_counts[k];
    if (c == 0) continue;
    const auto o = order::order_of_index(k);
    m.side[o.side] += c;
    m.action[o.action] += c;
    m.mo[o.is_mo] += c;
    m.price[o.price_class] += c;
    m.volume[o.volume_class] += c;
  }
  return m;
}

KeyValues EvalReport::to_kv() const {
  KeyValues kv;
  kv.set("variant", variant);
  kv.set("master_seed", master_seed);
  kv.set("n_situations", n_situations);
  kv.set("n_seeds", n_seeds);
  kv.set("n_real", n_real);
  kv.set("n_fake", n_fake);
  kv.set("kld", kld);
  kv.set("mse", mse);
  kv.set("mse_seed_std", mse_seed_std);
  kv.set("has_policy", std::string(has_policy ? "true" : "false"));
  if (has_policy) {
    kv.set("nll_mean", nll_mean);
    kv.set("nll_std_mean", nll_std_mean);
    kv.set("nll_std_situations", nll_std_situations);
    kv.set("entropy_mean", entropy_mean);
  } else {
    kv.set("nll_mean", std::string("na"));
    kv.set("nll_std_mean", std::string("na"));
    kv.set("nll_std_situations", std::string("na"));
    kv.set("entropy_mean", std::string("na"));
  }
  return kv;
}

namespace {

template <std::size_t N>
void write_histogram(const std::filesystem::path& path, const std::array<std::uint64_t, N>& real,
                     const std::array<std::uint64_t, N>& fake) {
  const double nr = std::accumulate(real.begin(), real.end(), 0.0);
  const double nf = std::accumulate(fake.begin(), fake.end(), 0.0);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << "class,count,real_prob,fake_prob\n";
  for (std::size_t k = 0; k < N; ++k) {
    out << k << ',' << real[k] << ',' << format_double(nr > 0 ? real[k] / nr : 0.0) << ','
        << format_double(nf > 0 ? fake[k] / nf : 0.0) << '\n';
  }
}

}  // namespace

void EvalReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  to_kv().save(dir / "report.txt", kReportUnits);
  const Marginals r = marginals(real_counts);
  const Marginals f = marginals(fake_counts);
  write_histogram(dir / "hist_side.csv", r.side, f.side);
  write_histogram(dir / "hist_action.csv", r.action, f.action);
  write_histogram(dir / "hist_mo.csv", r.mo, f.mo);
  write_histogram(dir / "hist_price.csv", r.price, f.price);
  write_histogram(dir / "hist_volume.csv", r.volume, f.volume);
}

}  // namespace pgsgan::eval
