#pragma once

#include <span>
#include <string>
#include <vector>

#include "pgsgan/dataflow/stream.hpp"
#include "pgsgan/evalkit/metrics.hpp"
#include "pgsgan/gan/nets.hpp"

namespace pgsgan::eval::inline PGSGAN_PRECISION {

// n_seeds draws for one situation. Policy generators also report the NLL
// of the real next order and the entropy of each drawn policy.
struct Draws {
  std::vector<order::Order> orders;
  std::vector<double> nll_real;
  std::vector<double> entropy;
};

class OrderGenerator {
 public:
  virtual ~OrderGenerator() = default;
  virtual bool has_policy() const = 0;
  // Appends n_seeds draws; every randomness source comes from `rng`.
  virtual void draw(const order::Condition& cond, const order::Order& real, int n_seeds, Rng& rng,
                    Draws& out) = 0;
};

// Policy network in evaluation mode; one z per draw.
class PolicyGenerator : public OrderGenerator {
 public:
  explicit PolicyGenerator(gan::GeneratorNet& net) : net_(net) {}
  bool has_policy() const override { return true; }
  void draw(const order::Condition& cond, const order::Order& real, int n_seeds, Rng& rng, Draws& out) override;

 private:
  gan::GeneratorNet& net_;
};

// Continuous baseline: outputs are rounded with round_to_discrete.
class ContinuousGenerator : public OrderGenerator {
 public:
  explicit ContinuousGenerator(gan::ContinuousGeneratorNet& net) : net_(net) {}
  bool has_policy() const override { return false; }
  void draw(const order::Condition& cond, const order::Order& real, int n_seeds, Rng& rng, Draws& out) override;

 private:
  gan::ContinuousGeneratorNet& net_;
};

// By-chance reference: the uniform policy everywhere.
class UniformGenerator : public OrderGenerator {
 public:
  bool has_policy() const override { return true; }
  void draw(const order::Condition& cond, const order::Order& real, int n_seeds, Rng& rng, Draws& out) override;
};

// Situation i draws from Rng::derive(master_seed, "eval:situation:<i>"), so
// the report depends only on the generator, the windows and the seed.
// Throws DataError on an empty window set.
EvalReport evaluate_generator(OrderGenerator& gen, std::span<const data::Window> windows, int n_seeds,
                              std::uint64_t master_seed, const std::string& variant = {});

}  // namespace pgsgan::eval::inline PGSGAN_PRECISION
