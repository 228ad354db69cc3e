#pragma once

#include <vector>

#include "pgsgan/numcore/tensor.hpp"

PGSGAN_NAMESPACE_BEGIN
namespace num {

// y = x * w^T + b for x[batch,in], w[out,in], b[out]. `b` may be undefined.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

enum class PadMode { zero, circular };

struct Conv1dSpec {
  int stride = 1;
  int dilation = 1;
  int padding = 0;  // per side
  PadMode mode = PadMode::zero;
};

// Output length floor((len + 2*padding - dilation*(k-1) - 1) / stride) + 1.
std::int64_t conv1d_output_length(std::int64_t len, std::int64_t kernel, const Conv1dSpec& spec);

// Cross-correlation of x[batch,in_ch,len] with w[out_ch,in_ch,k], plus b[out_ch].
// Circular mode reads x at (t*stride - padding + j*dilation) mod len.
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, const Conv1dSpec& spec);

// Mean over windows along the last axis of x[batch,ch,len].
Tensor avg_pool1d(const Tensor& x, int window, int stride);

inline constexpr double kNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

// x[batch,features] normalized per feature over the batch, or x[batch,ch,len]
// per channel over batch and length; variance floored at kNormEpsilon.
// Training mode uses batch statistics and folds them into the running
// buffers (momentum 0.1, unbiased variance); evaluation uses the buffers.
Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                  Tensor& running_var, bool training);

// Each sample normalized over all its non-batch elements; gamma/beta have the
// per-sample shape.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta);

Tensor leaky_relu(const Tensor& x, real slope = real(0.2));
Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, real factor);
Tensor add_scalar(const Tensor& x, real value);

// Concatenate along axis 1; all other dims must agree.
Tensor concat(const std::vector<Tensor>& parts);
Tensor reshape(const Tensor& x, const Shape& shape);
// [batch, ...] -> [batch*times, ...], each row repeated `times` times in place.
Tensor repeat_rows(const Tensor& x, std::int64_t times);
// Columns [begin, end) of x[batch, n].
Tensor slice_cols(const Tensor& x, std::int64_t begin, std::int64_t end);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

}  // namespace num
PGSGAN_NAMESPACE_END
