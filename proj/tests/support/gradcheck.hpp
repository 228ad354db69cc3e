#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "pgsgan/numcore/ops.hpp"
#include "pgsgan/numcore/param_store.hpp"
#include "pgsgan/rng.hpp"

namespace gradcheck {

using pgsgan::num::Tensor;

struct Result {
  double max_rel_err = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

// Entries whose gradients are both below `floor` are compared on the
// absolute scale floor * tolerance instead of relatively.
inline double rel_err(double a, double n, double floor = 1e-4) {
  return std::fabs(a - n) / std::max({std::fabs(a), std::fabs(n), floor});
}

// Analytic gradients of the scalar `loss()` against central differences
// for every entry of every listed tensor. `loss` must be a pure function of
// the tensor values.
inline Result check(const std::function<Tensor()>& loss, const std::vector<std::pair<std::string, Tensor>>& inputs,
                    double h = 1e-6) {
  for (auto [name, t] : inputs) t.zero_grad();
  pgsgan::num::backward(loss());
  Result r;
  for (auto [name, t] : inputs) {
    const auto analytic = t.grad();
    auto data = t.mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double orig = data[i];
      data[i] = orig + h;
      const double up = loss().item();
      data[i] = orig - h;
      const double down = loss().item();
      data[i] = orig;
      const double numeric = (up - down) / (2 * h);
      const double e = rel_err(analytic[i], numeric);
      ++r.checked;
      if (e > r.max_rel_err) {
        r.max_rel_err = e;
        r.worst = name + "[" + std::to_string(i) + "] analytic " + std::to_string(analytic[i]) + " numeric " +
                  std::to_string(numeric);
      }
    }
  }
  return r;
}

// Every trainable tensor of a store.
inline std::vector<std::pair<std::string, Tensor>> trainable(const pgsgan::num::ParamStore& store) {
  std::vector<std::pair<std::string, Tensor>> out;
  for (const auto& n : store.trainable_names()) out.emplace_back(n, store.get(n));
  return out;
}

inline Tensor random_tensor(const pgsgan::num::Shape& shape, pgsgan::Rng& rng, bool requires_grad = true,
                            double scale = 1.0) {
  std::vector<pgsgan::real> v(static_cast<std::size_t>(pgsgan::num::numel_of(shape)));
  for (auto& x : v) x = static_cast<pgsgan::real>(scale * rng.normal());
  return Tensor::from(shape, std::move(v), requires_grad);
}

// sum(r * y) for a fixed random r (drawn once, outside the loss), so every
// output entry matters.
inline Tensor dot(const Tensor& y, const Tensor& r) { return pgsgan::num::sum(pgsgan::num::mul(y, r)); }

}  // namespace gradcheck
