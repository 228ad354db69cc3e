#include "pgsgan/numcore/spectral_norm.hpp"

#include <cmath>

#include "pgsgan/errors.hpp"

PGSGAN_NAMESPACE_BEGIN
namespace num {
namespace {

std::int64_t cols_of(const Tensor& w) { return w.numel() / w.dim(0); }

void check_state(const Tensor& w, const SpectralNormState& s) {
  if (w.rank() < 2) throw ShapeError("spectral_normalize: weight must have rank >= 2");
  if (s.u.numel() != w.dim(0) || s.v.numel() != cols_of(w)) {
    throw ShapeError("spectral_normalize: state vectors do not match weight " + shape_string(w.shape()));
  }
}

// Normalizes in place; leaves the vector untouched when its norm is zero.
void normalize(std::vector<double>& x, std::span<real> out) {
  double n = 0;
  for (double v : x) n += v * v;
  n = std::sqrt(n);
  if (n == 0.0) return;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<real>(x[i] / n);
}

double sigma_of(std::span<const real> w, std::span<const real> u, std::span<const real> v,
                std::int64_t rows, std::int64_t cols) {
  double s = 0;
  for (std::int64_t r = 0; r < rows; ++r) {
    double wv = 0;
    for (std::int64_t c = 0; c < cols; ++c) wv += static_cast<double>(w[r * cols + c]) * v[c];
    s += u[r] * wv;
  }
  return s;
}

}  // namespace

SpectralNormState SpectralNormState::random(std::int64_t rows, std::int64_t cols, Rng& rng) {
  auto unit = [&](std::int64_t n) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    std::vector<real> out(n, real(0));
    normalize(x, out);
    return Tensor::from({n}, std::move(out));
  };
  SpectralNormState s;
  s.u = unit(rows);
  s.v = unit(cols);
  return s;
}

double power_iteration(const Tensor& weight, SpectralNormState& state, int iterations) {
  check_state(weight, state);
  const auto rows = weight.dim(0), cols = cols_of(weight);
  const auto w = weight.data();
  auto u = state.u.mutable_data();
  auto v = state.v.mutable_data();
  std::vector<double> tmp_v(cols), tmp_u(rows);
  for (int it = 0; it < iterations; ++it) {
    std::fill(tmp_v.begin(), tmp_v.end(), 0.0);
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t c = 0; c < cols; ++c) tmp_v[c] += static_cast<double>(w[r * cols + c]) * u[r];
    }
    normalize(tmp_v, v);
    for (std::int64_t r = 0; r < rows; ++r) {
      double acc = 0;
      for (std::int64_t c = 0; c < cols; ++c) acc += static_cast<double>(w[r * cols + c]) * v[c];
      tmp_u[r] = acc;
    }
    normalize(tmp_u, u);
  }
  return sigma_of(w, u, v, rows, cols);
}

Tensor spectral_normalize(const Tensor& weight, SpectralNormState& state, int iterations) {
  const double raw_sigma = power_iteration(weight, state, iterations);
  const bool clamped = !(raw_sigma >= kSigmaFloor);
  const double sigma = clamped ? kSigmaFloor : raw_sigma;
  const auto w = weight.data();
  std::vector<real> y(w.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<real>(w[i] / sigma);

  const auto rows = weight.dim(0), cols = cols_of(weight);
  std::vector<real> u(state.u.data().begin(), state.u.data().end());
  std::vector<real> v(state.v.data().begin(), state.v.data().end());
  return make_result(weight.shape(), std::move(y), {weight},
                     [=, u = std::move(u), v = std::move(v)](detail::Node& self) {
                       auto& g = self.inputs[0]->grad_buffer();
                       // dW = (G - <G, W_sn> u v^T) / sigma
                       double inner = 0;
                       if (!clamped) {
                         for (std::size_t i = 0; i < g.size(); ++i) inner += self.grad[i] * self.value[i];
                       }
                       for (std::int64_t r = 0; r < rows; ++r) {
                         for (std::int64_t c = 0; c < cols; ++c) {
                           const auto i = r * cols + c;
                           g[i] += static_cast<real>((self.grad[i] - inner * u[r] * v[c]) / sigma);
                         }
                       }
                     });
}

}  // namespace num
PGSGAN_NAMESPACE_END
