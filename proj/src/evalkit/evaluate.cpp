#include "pgsgan/evalkit/evaluate.hpp"

#include <cmath>

#include "pgsgan/errors.hpp"
#include "pgsgan/gan/objective.hpp"
#include "pgsgan/numcore/ops.hpp"

namespace pgsgan::eval::inline PGSGAN_PRECISION {

using num::Tensor;

namespace {

double population_std(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

void PolicyGenerator::draw(const order::Condition& cond, const order::Order& real, int n_seeds, Rng& rng,
                           Draws& out) {
  num::NoGradGuard guard;
  const order::Condition* one[] = {&cond};
  const auto batch = gan::condition_batch(std::span<const order::Condition* const>(one));
  const Tensor z = gan::seed_batch(n_seeds, rng);
  const Tensor enc = num::repeat_rows(net_.encode(batch, gan::Phase::eval), n_seeds);
  const auto policies = gan::policies_of(net_.logits_from_features(enc, z, gan::Phase::eval));
  for (const auto& p : policies) {
    out.orders.push_back(gan::sample_order(p, rng).emitted);
    out.nll_real.push_back(gan::nll(p, real));
    out.entropy.push_back(gan::entropy_bits(p));
  }
}

void ContinuousGenerator::draw(const order::Condition& cond, const order::Order&, int n_seeds, Rng& rng,
                               Draws& out) {
  num::NoGradGuard guard;
  const order::Condition* one[] = {&cond};
  const auto batch = gan::condition_batch(std::span<const order::Condition* const>(one));
  const Tensor z = gan::seed_batch(n_seeds, rng);
  const Tensor enc = num::repeat_rows(net_.encode(batch, gan::Phase::eval), n_seeds);
  const Tensor f = net_.features_from_encoding(enc, z, gan::Phase::eval);
  for (int i = 0; i < n_seeds; ++i) {
    const auto values = gan::continuous_values(f.data().subspan(i * order::kOrderFeatures, order::kOrderFeatures));
    out.orders.push_back(gan::round_to_discrete(std::span<const double, 5>(values)));
  }
}

void UniformGenerator::draw(const order::Condition&, const order::Order& real, int n_seeds, Rng& rng,
                            Draws& out) {
  const auto p = gan::Policy::uniform();
  const double h = gan::entropy_bits(p), l = gan::nll(p, real);
  for (int i = 0; i < n_seeds; ++i) {
    out.orders.push_back(gan::sample_order(p, rng).emitted);
    out.nll_real.push_back(l);
    out.entropy.push_back(h);
  }
}

EvalReport evaluate_generator(OrderGenerator& gen, std::span<const data::Window> windows, int n_seeds,
                              std::uint64_t master_seed, const std::string& variant) {
  if (windows.empty()) throw DataError("evaluation needs at least one test situation");
  if (n_seeds < 1) throw UsageError("n_seeds must be positive");

  EvalReport r;
  r.variant = variant;
  r.master_seed = master_seed;
  r.n_situations = windows.size();
  r.n_seeds = static_cast<std::uint64_t>(n_seeds);
  r.has_policy = gen.has_policy();

  std::vector<std::vector<std::uint64_t>> per_seed(static_cast<std::size_t>(n_seeds),
                                                   std::vector<std::uint64_t>(order::kNumClasses, 0));
  double nll_sum = 0.0, nll_std_sum = 0.0, entropy_sum = 0.0;
  std::vector<double> situation_means;
  Draws d;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    ++r.real_counts[order::class_index(w.target)];
    Rng rng = Rng::derive(master_seed, "eval:situation:" + std::to_string(i));
    d.orders.clear();
    d.nll_real.clear();
    d.entropy.clear();
    gen.draw(w.condition, w.target, n_seeds, rng, d);
    for (int s = 0; s < n_seeds; ++s) {
      const int c = order::class_index(d.orders[s]);
      ++r.fake_counts[c];
      ++per_seed[s][c];
    }
    if (r.has_policy) {
      double m = 0.0;
      for (double v : d.nll_real) m += v;
      m /= n_seeds;
      situation_means.push_back(m);
      nll_sum += m;
      nll_std_sum += population_std(d.nll_real, m);
      for (double v : d.entropy) entropy_sum += v;
    }
  }
  r.n_real = windows.size();
  r.n_fake = windows.size() * static_cast<std::uint64_t>(n_seeds);

  const auto real = distribution_from_counts(r.real_counts);
  const auto fake = distribution_from_counts(r.fake_counts);
  r.kld = kld_bits(real, fake);
  r.mse = mse(real, fake);
  std::vector<double> seed_mse;
  for (const auto& counts : per_seed) seed_mse.push_back(mse(real, distribution_from_counts(counts)));
  double mean_seed_mse = 0.0;
  for (double v : seed_mse) mean_seed_mse += v;
  mean_seed_mse /= static_cast<double>(seed_mse.size());
  r.mse_seed_std = population_std(seed_mse, mean_seed_mse);

  if (r.has_policy) {
    const double n = static_cast<double>(windows.size());
    r.nll_mean = nll_sum / n;
    r.nll_std_mean = nll_std_sum / n;
    r.nll_std_situations = population_std(situation_means, r.nll_mean);
    r.entropy_mean = entropy_sum / (n * n_seeds);
  }
  return r;
}

}  // namespace pgsgan::eval::inline PGSGAN_PRECISION
