#include "pgsgan/numcore/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "pgsgan/errors.hpp"

PGSGAN_NAMESPACE_BEGIN
namespace num {
namespace {

using MatR = Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using CMapR = Eigen::Map<const MatR>;
using detail::Node;

[[noreturn]] void mismatch(const char* op, const std::string& detail) {
  throw ShapeError(std::string(op) + ": " + detail);
}

void require_rank(const char* op, const Tensor& t, int rank, const char* what) {
  if (!t.defined() || t.rank() != rank) {
    mismatch(op, std::string(what) + " must have rank " + std::to_string(rank) + ", got " +
                     (t.defined() ? shape_string(t.shape()) : "undefined"));
  }
}

void require_same(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    mismatch(op, "shapes differ: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

bool wants(const Node& self, std::size_t i) { return self.inputs[i]->requires_grad; }

// Elementwise op whose derivative depends on input/output values.
template <typename Fwd, typename Deriv>
Tensor pointwise(const Tensor& x, Fwd fwd, Deriv deriv) {
  std::vector<real> y(x.data().size());
  const auto xd = x.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = fwd(xd[i]);
  return make_result(x.shape(), std::move(y), {x}, [deriv](Node& self) {
    auto& gx = self.inputs[0]->grad_buffer();
    const auto& xv = self.inputs[0]->value;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i] * deriv(xv[i], self.value[i]);
  });
}

}  // namespace

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank("linear", x, 2, "input");
  require_rank("linear", w, 2, "weight");
  const auto batch = x.dim(0), in = x.dim(1), out = w.dim(0);
  if (w.dim(1) != in) {
    mismatch("linear", "input " + shape_string(x.shape()) + " incompatible with weight " +
                           shape_string(w.shape()));
  }
  if (b.defined() && (b.rank() != 1 || b.dim(0) != out)) {
    mismatch("linear", "bias " + shape_string(b.shape()) + " must be [" + std::to_string(out) + "]");
  }
  std::vector<real> y(static_cast<std::size_t>(batch * out));
  MapR Y(y.data(), batch, out);
  Y.noalias() = CMapR(x.data().data(), batch, in) * CMapR(w.data().data(), out, in).transpose();
  if (b.defined()) {
    const auto bd = b.data();
    for (std::int64_t r = 0; r < batch; ++r) {
      for (std::int64_t c = 0; c < out; ++c) Y(r, c) += bd[c];
    }
  }
  std::vector<Tensor> inputs{x, w};
  if (b.defined()) inputs.push_back(b);
  return make_result({batch, out}, std::move(y), inputs, [batch, in, out](Node& self) {
    CMapR G(self.grad.data(), batch, out);
    Node& xn = *self.inputs[0];
    Node& wn = *self.inputs[1];
    if (xn.requires_grad) {
      MapR(xn.grad_buffer().data(), batch, in).noalias() += G * CMapR(wn.value.data(), out, in);
    }
    if (wn.requires_grad) {
      MapR(wn.grad_buffer().data(), out, in).noalias() += G.transpose() * CMapR(xn.value.data(), batch, in);
    }
    if (self.inputs.size() > 2 && wants(self, 2)) {
      auto& gb = self.inputs[2]->grad_buffer();
      for (std::int64_t r = 0; r < batch; ++r) {
        for (std::int64_t c = 0; c < out; ++c) gb[c] += G(r, c);
      }
    }
  });
}

std::int64_t conv1d_output_length(std::int64_t len, std::int64_t kernel, const Conv1dSpec& spec) {
  const std::int64_t span = static_cast<std::int64_t>(spec.dilation) * (kernel - 1) + 1;
  const std::int64_t padded = len + 2 * spec.padding;
  if (span > padded) return 0;
  return (padded - span) / spec.stride + 1;
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, const Conv1dSpec& spec) {
  require_rank("conv1d", x, 3, "input");
  require_rank("conv1d", w, 3, "weight");
  if (spec.stride < 1 || spec.dilation < 1 || spec.padding < 0) {
    mismatch("conv1d", "stride and dilation must be >= 1 and padding >= 0");
  }
  const auto batch = x.dim(0), in_ch = x.dim(1), len = x.dim(2);
  const auto out_ch = w.dim(0), kernel = w.dim(2);
  if (w.dim(1) != in_ch) {
    mismatch("conv1d", "input " + shape_string(x.shape()) + " has " + std::to_string(in_ch) +
                           " channels, weight " + shape_string(w.shape()) + " expects " +
                           std::to_string(w.dim(1)));
  }
  if (b.defined() && (b.rank() != 1 || b.dim(0) != out_ch)) {
    mismatch("conv1d", "bias " + shape_string(b.shape()) + " must be [" + std::to_string(out_ch) + "]");
  }
  const std::int64_t out_len = conv1d_output_length(len, kernel, spec);
  if (out_len <= 0) {
    mismatch("conv1d", "kernel " + std::to_string(kernel) + " with dilation " +
                           std::to_string(spec.dilation) + " exceeds padded input length " +
                           std::to_string(len + 2 * spec.padding));
  }

  // Source index per (output position, tap); -1 for zero padding.
  std::vector<std::int64_t> src(static_cast<std::size_t>(out_len * kernel));
  for (std::int64_t t = 0; t < out_len; ++t) {
    for (std::int64_t j = 0; j < kernel; ++j) {
      std::int64_t p = t * spec.stride - spec.padding + j * spec.dilation;
      if (spec.mode == PadMode::circular) {
        p = ((p % len) + len) % len;
      } else if (p < 0 || p >= len) {
        p = -1;
      }
      src[t * kernel + j] = p;
    }
  }

  const std::int64_t rows = batch * out_len, cols_n = in_ch * kernel;
  auto cols = std::make_shared<std::vector<real>>(static_cast<std::size_t>(rows * cols_n), real(0));
  const auto xd = x.data();
  for (std::int64_t n = 0; n < batch; ++n) {
    for (std::int64_t t = 0; t < out_len; ++t) {
      real* row = cols->data() + (n * out_len + t) * cols_n;
      for (std::int64_t c = 0; c < in_ch; ++c) {
        const real* xc = xd.data() + (n * in_ch + c) * len;
        for (std::int64_t j = 0; j < kernel; ++j) {
          const auto p = src[t * kernel + j];
          if (p >= 0) row[c * kernel + j] = xc[p];
        }
      }
    }
  }

  MatR out_mat(rows, out_ch);
  out_mat.noalias() = CMapR(cols->data(), rows, cols_n) * CMapR(w.data().data(), out_ch, cols_n).transpose();
  std::vector<real> y(static_cast<std::size_t>(batch * out_ch * out_len));
  const bool has_bias = b.defined();
  for (std::int64_t n = 0; n < batch; ++n) {
    for (std::int64_t o = 0; o < out_ch; ++o) {
      const real bias = has_bias ? b.data()[o] : real(0);
      real* yo = y.data() + (n * out_ch + o) * out_len;
      for (std::int64_t t = 0; t < out_len; ++t) yo[t] = out_mat(n * out_len + t, o) + bias;
    }
  }

  std::vector<Tensor> inputs{x, w};
  if (has_bias) inputs.push_back(b);
  return make_result(
      {batch, out_ch, out_len}, std::move(y), inputs,
      [=, src = std::move(src)](Node& self) {
        MatR g(rows, out_ch);
        for (std::int64_t n = 0; n < batch; ++n) {
          for (std::int64_t o = 0; o < out_ch; ++o) {
            const real* go = self.grad.data() + (n * out_ch + o) * out_len;
            for (std::int64_t t = 0; t < out_len; ++t) g(n * out_len + t, o) = go[t];
          }
        }
        Node& xn = *self.inputs[0];
        Node& wn = *self.inputs[1];
        if (wn.requires_grad) {
          MapR(wn.grad_buffer().data(), out_ch, cols_n).noalias() +=
              g.transpose() * CMapR(cols->data(), rows, cols_n);
        }
        if (has_bias && wants(self, 2)) {
          auto& gb = self.inputs[2]->grad_buffer();
          for (std::int64_t r = 0; r < rows; ++r) {
            for (std::int64_t o = 0; o < out_ch; ++o) gb[o] += g(r, o);
          }
        }
        if (xn.requires_grad) {
          MatR dcols = g * CMapR(wn.value.data(), out_ch, cols_n);
          auto& gx = xn.grad_buffer();
          for (std::int64_t n = 0; n < batch; ++n) {
            for (std::int64_t t = 0; t < out_len; ++t) {
              const real* row = dcols.data() + (n * out_len + t) * cols_n;
              for (std::int64_t c = 0; c < in_ch; ++c) {
                real* gc = gx.data() + (n * in_ch + c) * len;
                for (std::int64_t j = 0; j < kernel; ++j) {
                  const auto p = src[t * kernel + j];
                  if (p >= 0) gc[p] += row[c * kernel + j];
                }
              }
            }
          }
        }
      });
}

Tensor avg_pool1d(const Tensor& x, int window, int stride) {
  require_rank("avg_pool1d", x, 3, "input");
  if (window <= 0) mismatch("avg_pool1d", "window must be positive");
  if (stride <= 0) mismatch("avg_pool1d", "stride must be positive");
  const auto batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
  if (window > len) {
    mismatch("avg_pool1d", "window " + std::to_string(window) + " exceeds length " + std::to_string(len));
  }
  const std::int64_t out_len = (len - window) / stride + 1;
  std::vector<real> y(static_cast<std::size_t>(batch * ch * out_len));
  const auto xd = x.data();
  const real inv = real(1) / real(window);
  for (std::int64_t r = 0; r < batch * ch; ++r) {
    for (std::int64_t t = 0; t < out_len; ++t) {
      real s = 0;
      for (int j = 0; j < window; ++j) s += xd[r * len + t * stride + j];
      y[r * out_len + t] = s * inv;
    }
  }
  return make_result({batch, ch, out_len}, std::move(y), {x}, [=](Node& self) {
    auto& gx = self.inputs[0]->grad_buffer();
    for (std::int64_t r = 0; r < batch * ch; ++r) {
      for (std::int64_t t = 0; t < out_len; ++t) {
        const real g = self.grad[r * out_len + t] * inv;
        for (int j = 0; j < window; ++j) gx[r * len + t * stride + j] += g;
      }
    }
  });
}

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                  Tensor& running_var, bool training) {
  if (!x.defined() || (x.rank() != 2 && x.rank() != 3)) {
    mismatch("batch_norm", "input must be [batch,features] or [batch,channels,len]");
  }
  const auto batch = x.dim(0), feat = x.dim(1), len = x.rank() == 3 ? x.dim(2) : 1;
  for (const Tensor* t : std::initializer_list<const Tensor*>{&gamma, &beta, &running_mean, &running_var}) {
    if (t->rank() != 1 || t->dim(0) != feat) {
      mismatch("batch_norm", "parameter " + shape_string(t->shape()) + " must be [" + std::to_string(feat) + "]");
    }
  }
  if (training && batch < 2) mismatch("batch_norm", "training mode needs batch >= 2");

  const std::int64_t count = batch * len;
  const auto xd = x.data();
  auto idx = [=](std::int64_t f, std::int64_t e) { return ((e / len) * feat + f) * len + (e % len); };

  std::vector<real> mean_v(feat), var_v(feat);
  if (training) {
    for (std::int64_t f = 0; f < feat; ++f) {
      double m = 0;
      for (std::int64_t e = 0; e < count; ++e) m += xd[idx(f, e)];
      m /= static_cast<double>(count);
      double v = 0;
      for (std::int64_t e = 0; e < count; ++e) {
        const double d = xd[idx(f, e)] - m;
        v += d * d;
      }
      mean_v[f] = static_cast<real>(m);
      var_v[f] = static_cast<real>(v / static_cast<double>(count));
      auto rm = running_mean.mutable_data();
      auto rv = running_var.mutable_data();
      const double unbiased = v / static_cast<double>(count - 1);
      rm[f] = static_cast<real>((1.0 - kBatchNormMomentum) * rm[f] + kBatchNormMomentum * m);
      rv[f] = static_cast<real>((1.0 - kBatchNormMomentum) * rv[f] + kBatchNormMomentum * unbiased);
    }
  } else {
    std::copy(running_mean.data().begin(), running_mean.data().end(), mean_v.begin());
    std::copy(running_var.data().begin(), running_var.data().end(), var_v.begin());
  }

  auto xhat = std::make_shared<std::vector<real>>(xd.size());
  std::vector<real> inv_std(feat);
  std::vector<char> floored(feat);
  std::vector<real> y(xd.size());
  const auto gd = gamma.data(), bd = beta.data();
  for (std::int64_t f = 0; f < feat; ++f) {
    floored[f] = var_v[f] < real(kNormEpsilon);
    inv_std[f] = real(1) / std::sqrt(std::max(var_v[f], real(kNormEpsilon)));
    for (std::int64_t e = 0; e < count; ++e) {
      const auto i = idx(f, e);
      (*xhat)[i] = (xd[i] - mean_v[f]) * inv_std[f];
      y[i] = gd[f] * (*xhat)[i] + bd[f];
    }
  }

  return make_result(x.shape(), std::move(y), {x, gamma, beta},
                     [=, inv_std = std::move(inv_std), floored = std::move(floored)](Node& self) {
                       const auto& gv = self.inputs[1]->value;
                       for (std::int64_t f = 0; f < feat; ++f) {
                         double sum_g = 0, sum_gx = 0;
                         for (std::int64_t e = 0; e < count; ++e) {
                           const auto i = idx(f, e);
                           sum_g += self.grad[i];
                           sum_gx += self.grad[i] * (*xhat)[i];
                         }
                         if (wants(self, 1)) self.inputs[1]->grad_buffer()[f] += static_cast<real>(sum_gx);
                         if (wants(self, 2)) self.inputs[2]->grad_buffer()[f] += static_cast<real>(sum_g);
                         if (!wants(self, 0)) continue;
                         auto& gx = self.inputs[0]->grad_buffer();
                         if (!training) {
                           for (std::int64_t e = 0; e < count; ++e) {
                             const auto i = idx(f, e);
                             gx[i] += self.grad[i] * gv[f] * inv_std[f];
                           }
                           continue;
                         }
                         // d/dx of gamma * x_hat with batch statistics.
                         const double n = static_cast<double>(count);
                         const double mg = sum_g * gv[f] / n, mgx = sum_gx * gv[f] / n;
                         for (std::int64_t e = 0; e < count; ++e) {
                           const auto i = idx(f, e);
                           double d = self.grad[i] * gv[f] - mg;
                           if (!floored[f]) d -= (*xhat)[i] * mgx;
                           gx[i] += static_cast<real>(d * inv_std[f]);
                         }
                       }
                     });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta) {
  if (!x.defined() || x.rank() < 2) mismatch("layer_norm", "input must be [batch, ...]");
  const auto batch = x.dim(0);
  const std::int64_t width = x.numel() / batch;
  if (gamma.numel() != width || beta.numel() != width) {
    mismatch("layer_norm", "affine parameters must hold " + std::to_string(width) + " values");
  }
  const auto xd = x.data(), gd = gamma.data(), bd = beta.data();
  auto xhat = std::make_shared<std::vector<real>>(xd.size());
  std::vector<real> inv_std(batch);
  std::vector<char> floored(batch);
  std::vector<real> y(xd.size());
  for (std::int64_t n = 0; n < batch; ++n) {
    const real* row = xd.data() + n * width;
    double m = 0;
    for (std::int64_t i = 0; i < width; ++i) m += row[i];
    m /= static_cast<double>(width);
    double v = 0;
    for (std::int64_t i = 0; i < width; ++i) v += (row[i] - m) * (row[i] - m);
    v /= static_cast<double>(width);
    floored[n] = v < kNormEpsilon;
    inv_std[n] = static_cast<real>(1.0 / std::sqrt(std::max(v, kNormEpsilon)));
    for (std::int64_t i = 0; i < width; ++i) {
      const auto k = n * width + i;
      (*xhat)[k] = static_cast<real>((row[i] - m) * inv_std[n]);
      y[k] = gd[i] * (*xhat)[k] + bd[i];
    }
  }
  return make_result(x.shape(), std::move(y), {x, gamma, beta},
                     [=, inv_std = std::move(inv_std), floored = std::move(floored)](Node& self) {
                       const auto& gv = self.inputs[1]->value;
                       const bool gx_on = wants(self, 0), gg_on = wants(self, 1), gb_on = wants(self, 2);
                       for (std::int64_t n = 0; n < batch; ++n) {
                         double sum_d = 0, sum_dx = 0;
                         for (std::int64_t i = 0; i < width; ++i) {
                           const auto k = n * width + i;
                           const double d = self.grad[k] * gv[i];
                           sum_d += d;
                           sum_dx += d * (*xhat)[k];
                           if (gg_on) self.inputs[1]->grad_buffer()[i] += self.grad[k] * (*xhat)[k];
                           if (gb_on) self.inputs[2]->grad_buffer()[i] += self.grad[k];
                         }
                         if (!gx_on) continue;
                         auto& gx = self.inputs[0]->grad_buffer();
                         const double w = static_cast<double>(width);
                         for (std::int64_t i = 0; i < width; ++i) {
                           const auto k = n * width + i;
                           double d = self.grad[k] * gv[i] - sum_d / w;
                           if (!floored[n]) d -= (*xhat)[k] * sum_dx / w;
                           gx[k] += static_cast<real>(d * inv_std[n]);
                         }
                       }
                     });
}

Tensor leaky_relu(const Tensor& x, real slope) {
  return pointwise(
      x, [slope](real v) { return v > 0 ? v : slope * v; },
      [slope](real v, real) { return v > 0 ? real(1) : slope; });
}

Tensor relu(const Tensor& x) {
  return pointwise(
      x, [](real v) { return v > 0 ? v : real(0); }, [](real v, real) { return v > 0 ? real(1) : real(0); });
}

Tensor tanh(const Tensor& x) {
  return pointwise(
      x, [](real v) { return std::tanh(v); }, [](real, real y) { return real(1) - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return pointwise(
      x,
      [](real v) {
        if (v >= 0) return real(1) / (real(1) + std::exp(-v));
        const real e = std::exp(v);
        return e / (real(1) + e);
      },
      [](real, real y) { return y * (real(1) - y); });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same("add", a, b);
  std::vector<real> y(a.data().begin(), a.data().end());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b.data()[i];
  return make_result(a.shape(), std::move(y), {a, b}, [](Node& self) {
    for (int k = 0; k < 2; ++k) {
      if (!wants(self, k)) continue;
      auto& g = self.inputs[k]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, scale(b, real(-1))); }

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same("mul", a, b);
  std::vector<real> y(a.data().begin(), a.data().end());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b.data()[i];
  return make_result(a.shape(), std::move(y), {a, b}, [](Node& self) {
    const auto& av = self.inputs[0]->value;
    const auto& bv = self.inputs[1]->value;
    if (wants(self, 0)) {
      auto& g = self.inputs[0]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bv[i];
    }
    if (wants(self, 1)) {
      auto& g = self.inputs[1]->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * av[i];
    }
  });
}

Tensor scale(const Tensor& x, real factor) {
  return pointwise(
      x, [factor](real v) { return v * factor; }, [factor](real, real) { return factor; });
}

Tensor add_scalar(const Tensor& x, real value) {
  return pointwise(
      x, [value](real v) { return v + value; }, [](real, real) { return real(1); });
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) mismatch("concat", "nothing to concatenate");
  const Tensor& first = parts.front();
  if (first.rank() < 2) mismatch("concat", "inputs must have rank >= 2");
  const auto batch = first.dim(0);
  std::int64_t inner = 1;
  for (int a = 2; a < first.rank(); ++a) inner *= first.dim(a);
  std::int64_t total_ch = 0;
  std::vector<std::int64_t> widths;
  for (const auto& p : parts) {
    if (p.rank() != first.rank() || p.dim(0) != batch) {
      mismatch("concat", "incompatible part " + shape_string(p.shape()) + " vs " + shape_string(first.shape()));
    }
    for (int a = 2; a < first.rank(); ++a) {
      if (p.dim(a) != first.dim(a)) {
        mismatch("concat", "incompatible part " + shape_string(p.shape()) + " vs " + shape_string(first.shape()));
      }
    }
    widths.push_back(p.dim(1) * inner);
    total_ch += p.dim(1);
  }
  const std::int64_t row = total_ch * inner;
  std::vector<real> y(static_cast<std::size_t>(batch * row));
  std::int64_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto d = parts[k].data();
    for (std::int64_t n = 0; n < batch; ++n) {
      std::copy_n(d.data() + n * widths[k], widths[k], y.data() + n * row + offset);
    }
    offset += widths[k];
  }
  Shape shape = first.shape();
  shape[1] = total_ch;
  return make_result(shape, std::move(y), parts, [=](Node& self) {
    std::int64_t off = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      if (wants(self, k)) {
        auto& g = self.inputs[k]->grad_buffer();
        for (std::int64_t n = 0; n < batch; ++n) {
          for (std::int64_t i = 0; i < widths[k]; ++i) g[n * widths[k] + i] += self.grad[n * row + off + i];
        }
      }
      off += widths[k];
    }
  });
}

Tensor reshape(const Tensor& x, const Shape& shape) {
  if (numel_of(shape) != x.numel()) {
    mismatch("reshape", "cannot view " + shape_string(x.shape()) + " as " + shape_string(shape));
  }
  std::vector<real> y(x.data().begin(), x.data().end());
  return make_result(shape, std::move(y), {x}, [](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor repeat_rows(const Tensor& x, std::int64_t times) {
  if (times < 1) mismatch("repeat_rows", "times must be positive");
  const auto batch = x.dim(0);
  const std::int64_t width = x.numel() / batch;
  std::vector<real> y(static_cast<std::size_t>(x.numel() * times));
  const auto xd = x.data();
  for (std::int64_t n = 0; n < batch; ++n) {
    for (std::int64_t r = 0; r < times; ++r) {
      std::copy_n(xd.data() + n * width, width, y.data() + (n * times + r) * width);
    }
  }
  Shape shape = x.shape();
  shape[0] = batch * times;
  return make_result(shape, std::move(y), {x}, [=](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::int64_t n = 0; n < batch; ++n) {
      for (std::int64_t r = 0; r < times; ++r) {
        const real* src = self.grad.data() + (n * times + r) * width;
        for (std::int64_t i = 0; i < width; ++i) g[n * width + i] += src[i];
      }
    }
  });
}

Tensor slice_cols(const Tensor& x, std::int64_t begin, std::int64_t end) {
  require_rank("slice_cols", x, 2, "input");
  const auto batch = x.dim(0), n = x.dim(1);
  if (begin < 0 || end > n || begin >= end) mismatch("slice_cols", "bad column range");
  const std::int64_t w = end - begin;
  std::vector<real> y(static_cast<std::size_t>(batch * w));
  for (std::int64_t r = 0; r < batch; ++r) {
    std::copy_n(x.data().data() + r * n + begin, w, y.data() + r * w);
  }
  return make_result({batch, w}, std::move(y), {x}, [=](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::int64_t r = 0; r < batch; ++r) {
      for (std::int64_t i = 0; i < w; ++i) g[r * n + begin + i] += self.grad[r * w + i];
    }
  });
}

Tensor sum(const Tensor& x) {
  double s = 0;
  for (real v : x.data()) s += v;
  return make_result({1}, {static_cast<real>(s)}, {x}, [](Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), real(1) / static_cast<real>(x.numel())); }

}  // namespace num
PGSGAN_NAMESPACE_END
