#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "pgsgan/errors.hpp"
#include "pgsgan/evalkit/curves.hpp"
#include "pgsgan/evalkit/evaluate.hpp"
#include "pgsgan/evalkit/metrics.hpp"
#include "support/gan_fixtures.hpp"

using namespace pgsgan;
using namespace pgsgan::eval;
namespace fs = std::filesystem;

namespace {

constexpr int N = order::kNumClasses;

std::vector<double> random_distribution(Rng& rng, double zero_fraction = 0.0) {
  std::vector<double> p(N);
  double s = 0;
  for (auto& x : p) s += x = rng.uniform() < zero_fraction ? 0.0 : -std::log(1.0 - rng.uniform());
  for (auto& x : p) x /= s;
  return p;
}

std::vector<double> one_hot(int k) {
  std::vector<double> p(N, 0.0);
  p[k] = 1.0;
  return p;
}

long double naive_kld(const std::vector<double>& p, const std::vector<double>& q) {
  long double s = 0;
  for (int i = 0; i < N; ++i) {
    if (p[i] == 0) continue;
    if (q[i] == 0) return std::numeric_limits<long double>::infinity();
    s += (long double)p[i] * std::log2l((long double)p[i] / q[i]);
  }
  return s;
}

// Returns the real next order with certainty.
class CopyGenerator : public OrderGenerator {
 public:
  bool has_policy() const override { return true; }
  void draw(const order::Condition&, const order::Order& real, int n_seeds, Rng&, Draws& out) override {
    for (int s = 0; s < n_seeds; ++s) {
      out.orders.push_back(real);
      out.nll_real.push_back(0.0);
      out.entropy.push_back(0.0);
    }
  }
};

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("pgsgan_evalkit_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("empirical distributions") {
  const std::vector<order::Order> same(5, order::Order{1, 0, 0, 4, 2});
  auto d = empirical_distribution(same);
  CHECK(d.probs[order::class_index(same[0])] == 1.0);
  CHECK(d.sample_count == 5);

  std::vector<order::Order> all;
  for (int k = 0; k < N; ++k) all.push_back(order::order_of_index(k));
  d = empirical_distribution(all);
  for (double x : d.probs) CHECK(x == doctest::Approx(1.0 / N));

  // hand-counted fixture: classes 3,3,7,3,12799,7,0,3,7,3
  const std::vector<int> idx{3, 3, 7, 3, 12799, 7, 0, 3, 7, 3};
  std::vector<order::Order> ten;
  for (int k : idx) ten.push_back(order::order_of_index(k));
  d = empirical_distribution(ten);
  CHECK(d.probs[3] == doctest::Approx(0.5));
  CHECK(d.probs[7] == doctest::Approx(0.3));
  CHECK(d.probs[0] == doctest::Approx(0.1));
  CHECK(d.probs[12799] == doctest::Approx(0.1));

  CHECK(empirical_distribution({}).empty());
  CHECK_THROWS(ClassDistribution::from_probs(std::vector<double>(N, 0.5)));
  CHECK_THROWS(ClassDistribution::from_probs(std::vector<double>(3, 1.0 / 3)));
}

TEST_CASE("kld examples") {
  CHECK(kld_bits(std::vector<double>{0.5, 0.5}, std::vector<double>{0.25, 0.75}) ==
        doctest::Approx(0.20752).epsilon(1e-4));
  CHECK(kld_bits(std::vector<double>{0.5, 0.5}, std::vector<double>{0.25, 0.75}) ==
        doctest::Approx(0.5 * std::log2(2.0) + 0.5 * std::log2(0.5 / 0.75)).epsilon(1e-14));
  Rng rng(1);
  const auto p = random_distribution(rng);
  CHECK(kld_bits(p, p) == 0.0);
  auto q = p;
  q[77] = 0;
  CHECK(std::isinf(kld_bits(p, q)));
  CHECK(std::isinf(kld_bits(one_hot(5), one_hot(6))));
  CHECK(kld_bits(q, p) < std::numeric_limits<double>::infinity());
  CHECK(kld_bits(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0, 1.0}) == 0.0);
}

TEST_CASE("mse examples") {
  CHECK(mse(one_hot(0), one_hot(1)) == doctest::Approx(1.5625e-4).epsilon(1e-12));
  Rng rng(2);
  const auto p = random_distribution(rng);
  CHECK(mse(p, p) == 0.0);
}

TEST_CASE("metrics match brute-force summation on random pairs") {
  Rng rng(3);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const auto p = random_distribution(rng, t % 2 ? 0.3 : 0.0);
    const auto q = random_distribution(rng);
    long double m = 0, h = 0, tv = 0;
    for (int i = 0; i < N; ++i) {
      m += ((long double)p[i] - q[i]) * ((long double)p[i] - q[i]);
      if (p[i] > 0) h -= (long double)p[i] * std::log2l(p[i]);
      tv += std::fabs(p[i] - q[i]);
    }
    worst = std::max(worst, std::fabs(kld_bits(p, q) - double(naive_kld(p, q))));
    worst = std::max(worst, std::fabs(mse(p, q) - double(m / N)));
    worst = std::max(worst, std::fabs(entropy_bits(p) - double(h)));
    worst = std::max(worst, std::fabs(total_variation(p, q) - double(tv / 2)));
    CHECK(kld_bits(p, q) >= 0.0);
    CHECK(mse(p, q) == mse(q, p));
    // support violation exactly when some p > 0 meets q == 0
    CHECK(std::isinf(kld_bits(q, p)) == (t % 2 == 1));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("marginals") {
  std::vector<std::uint64_t> counts(N, 0);
  counts[order::class_index({1, 0, 0, 3, 4})] = 5;
  counts[order::class_index({0, 1, 1, 0, 4})] = 2;
  const auto m = marginals(counts);
  CHECK(m.side[1] == 5);
  CHECK(m.side[0] == 2);
  CHECK(m.mo[1] == 2);
  CHECK(m.price[3] == 5);
  CHECK(m.volume[4] == 7);
}

TEST_CASE("evaluation of a perfect copy generator") {
  const auto windows = fixtures::synthetic_windows(200);
  CopyGenerator gen;
  const auto r = evaluate_generator(gen, windows, 10, 1, "copy");
  CHECK(r.kld == 0.0);
  CHECK(r.mse == 0.0);
  CHECK(r.nll_mean == 0.0);
  CHECK(r.nll_std_mean == 0.0);
  CHECK(r.entropy_mean == 0.0);
  CHECK(r.n_situations == 200);
  CHECK(r.n_fake == 2000);
  CHECK(r.n_real == 200);
  CHECK_THROWS_AS(evaluate_generator(gen, std::span<const data::Window>{}, 10, 1), DataError);
}

TEST_CASE("evaluation of the uniform generator") {
  const auto windows = fixtures::synthetic_windows(300);
  UniformGenerator gen;
  const auto r = evaluate_generator(gen, windows, 20, 7, "uniform");
  CHECK(r.entropy_mean == doctest::Approx(13.6438).epsilon(1e-5));
  CHECK(r.nll_mean == doctest::Approx(9.4572).epsilon(1e-5));
  CHECK(r.nll_std_mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.has_policy);
  // same master seed, same report
  const auto again = evaluate_generator(gen, windows, 20, 7, "uniform");
  CHECK(again.fake_counts == r.fake_counts);
  CHECK(again.to_kv().to_string() == r.to_kv().to_string());
  const auto other = evaluate_generator(gen, windows, 20, 8, "uniform");
  CHECK(other.fake_counts != r.fake_counts);
}

TEST_CASE("policy entropy reported by evaluation equals the policy's own entropy") {
  const auto windows = fixtures::synthetic_windows(5);
  gan::GeneratorNet net(gan::NetConfig::small(), 3);
  PolicyGenerator gen(net);
  Rng rng(4), replay(4);
  Draws d;
  gen.draw(windows[0].condition, windows[0].target, 3, rng, d);
  const auto cond = fixtures::conditions_of({windows[0]});
  const auto z = gan::seed_batch(3, replay);
  const auto pols = gan::policies_of(net.logits(gan::condition_batch(std::vector{windows[0].condition, windows[0].condition, windows[0].condition}), z, num::Phase::eval));
  for (int s = 0; s < 3; ++s) {
    CHECK(d.entropy[s] == doctest::Approx(gan::entropy_bits(pols[s])).epsilon(1e-9));
    CHECK(d.nll_real[s] == doctest::Approx(gan::nll(pols[s], windows[0].target)).epsilon(1e-9));
  }
}

TEST_CASE("untrained generator kld is close to the uniform reference") {
  const auto windows = fixtures::synthetic_windows(1000);
  gan::GeneratorNet net(gan::NetConfig::small(), 11);
  PolicyGenerator untrained(net);
  UniformGenerator uniform;
  const auto a = evaluate_generator(untrained, windows, 100, 3);
  const auto b = evaluate_generator(uniform, windows, 100, 3);
  INFO("untrained " << a.kld << " uniform " << b.kld);
  CHECK(std::isfinite(b.kld));
  CHECK(std::fabs(a.kld - b.kld) < 0.1 * b.kld);
}

TEST_CASE("report files") {
  TempDir dir("report");
  const auto windows = fixtures::synthetic_windows(50);
  UniformGenerator gen;
  auto r = evaluate_generator(gen, windows, 2, 1, "uniform");
  r.write(dir.path);
  const auto kv = KeyValues::load(dir.path / "report.txt");
  CHECK(kv.get("variant") == "uniform");
  CHECK(kv.get("kld") == "inf");  // 100 fakes cannot cover the real support
  for (const char* m : {"side", "action", "mo", "price", "volume"}) {
    std::ifstream in(dir.path / (std::string("hist_") + m + ".csv"));
    std::string header;
    std::getline(in, header);
    CHECK(header == "class,count,real_prob,fake_prob");
  }
  std::ifstream report(dir.path / "report.txt");
  const std::string text{std::istreambuf_iterator<char>(report), {}};
  CHECK(text.find("bits") != std::string::npos);
  CHECK(text.find("nats") != std::string::npos);
}

TEST_CASE("learning curves") {
  std::vector<StepMetrics> steps;
  for (int e = 1; e <= 4; ++e) {
    for (int s = 0; s < 3; ++s) steps.push_back({e, (e - 1) * 3 + s + 1, 0.1 * s, -0.2, 9.4572, 13.6438});
  }
  std::vector<ValidationMetrics> valid{{2, 5.0, 1e-4, 9.0, 13.0}, {4, 4.0, 9e-5, 8.5, 12.5}};
  const auto c = learning_curves(steps, valid);
  CHECK(c.epochs.size() == 4);
  CHECK(c.series.at("entropy").size() == 4);
  for (double h : c.series.at("entropy")) CHECK(h == doctest::Approx(13.6438));
  CHECK(c.series.at("loss_c")[0] == doctest::Approx(0.1));
  CHECK(c.nll_by_chance == doctest::Approx(9.4572).epsilon(1e-5));
  CHECK(c.entropy_by_chance == doctest::Approx(13.6438).epsilon(1e-5));

  TempDir dir("curves");
  write_curves(c, dir.path);
  std::ifstream in(dir.path / "curve_entropy.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,value,by_chance");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("metric logs round-trip and reject malformed input") {
  TempDir dir("logs");
  const auto path = dir.path / "train_log.csv";
  {
    std::ofstream out(path);
    out << kStepLogHeader << "\n" << format_step_row({1, 1, 0.5, -0.25, 9.1, 13.2}) << "\n";
  }
  const auto rows = read_step_log(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].loss_g == -0.25);
  {
    std::ofstream out(path);
    out << "epoch,step,loss_c\n1,1,0.5\n";
  }
  CHECK_THROWS_AS(read_step_log(path), DataError);
  {
    std::ofstream out(path);
    out << kStepLogHeader << "\n1,1,0.5,x,1,1\n";
  }
  CHECK_THROWS_AS(read_step_log(path), DataError);
}
