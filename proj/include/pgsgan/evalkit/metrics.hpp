#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pgsgan/kvfile.hpp"
#include "pgsgan/orderdomain/order.hpp"

namespace pgsgan::eval {

// Probabilities over the 12,800 order classes. A distribution estimated
// from zero samples is the all-zero "empty" marker.
struct ClassDistribution {
  std::vector<double> probs = std::vector<double>(order::kNumClasses, 0.0);
  std::uint64_t sample_count = 0;

  bool empty() const { return sample_count == 0; }
  // Throws std::invalid_argument unless 12,800 non-negative entries summing to 1.
  static ClassDistribution from_probs(std::vector<double> probs, std::uint64_t sample_count = 0);
};

ClassDistribution empirical_distribution(std::span<const order::Order> orders);
ClassDistribution distribution_from_counts(std::span<const std::uint64_t> counts);

// D(P || Q) in bits. Terms with P(x) == 0 contribute 0; +infinity when some
// P(x) > 0 has Q(x) == 0.
double kld_bits(std::span<const double> p, std::span<const double> q);
double kld_bits(const ClassDistribution& p, const ClassDistribution& q);

// Mean over classes of (P(x) - Q(x))^2.
double mse(std::span<const double> p, std::span<const double> q);
double mse(const ClassDistribution& p, const ClassDistribution& q);

// Total variation distance, 0.5 * sum |P - Q|.
double total_variation(std::span<const double> p, std::span<const double> q);

// Shannon entropy in bits of an explicit distribution.
double entropy_bits(std::span<const double> p);

// Per-field histograms of a class-count vector: side, action, is_mo, price, volume.
struct Marginals {
  std::array<std::uint64_t, 2> side{};
  std::array<std::uint64_t, 2> action{};
  std::array<std::uint64_t, 2> mo{};
  std::array<std::uint64_t, order::kNumValueClasses> price{};
  std::array<std::uint64_t, order::kNumValueClasses> volume{};
};
Marginals marginals(std::span<const std::uint64_t> class_counts);

struct EvalReport {
  std::string variant;
  std::uint64_t master_seed = 0;
  std::uint64_t n_situations = 0;
  std::uint64_t n_seeds = 0;
  std::uint64_t n_real = 0;
  std::uint64_t n_fake = 0;

  double kld = 0.0;  // bits, D(real || fake), may be +inf
  double mse = 0.0;
  // Spread of per-seed MSE (each seed draws one order per situation).
  double mse_seed_std = 0.0;

  // Policy metrics; absent for generators without an explicit policy.
  bool has_policy = false;
  double nll_mean = 0.0;            // nats, real next order under the policy
  double nll_std_mean = 0.0;        // mean over situations of the across-seed std
  double nll_std_situations = 0.0;  // std over situations of the per-situation mean
  double entropy_mean = 0.0;        // bits

  std::vector<std::uint64_t> real_counts = std::vector<std::uint64_t>(order::kNumClasses, 0);
  std::vector<std::uint64_t> fake_counts = std::vector<std::uint64_t>(order::kNumClasses, 0);

  KeyValues to_kv() const;
  // report.txt plus hist_{side,action,mo,price,volume}.csv under `dir`.
  void write(const std::filesystem::path& dir) const;
};

inline const char* kReportUnits =
    "kld and entropy in bits (log2); nll in nats (natural log); kld = D(real || fake)";

}  // namespace pgsgan::eval
