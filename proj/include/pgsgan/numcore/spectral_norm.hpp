#pragma once

#include "pgsgan/numcore/tensor.hpp"
#include "pgsgan/rng.hpp"

PGSGAN_NAMESPACE_BEGIN
namespace num {

inline constexpr double kSigmaFloor = 1e-12;

// Power-iteration vectors for one weight viewed as [rows, cols]
// (higher-rank weights are flattened to [out, rest]). Both stay unit norm.
struct SpectralNormState {
  Tensor u;  // [rows]
  Tensor v;  // [cols]

  static SpectralNormState random(std::int64_t rows, std::int64_t cols, Rng& rng);
};

// Iteration count for the converged mode; 50 leaves ~1% of random 8x8
// matrices with a near-degenerate top pair above 1e-3.
inline constexpr int kConvergedIterations = 200;

// Runs `iterations` power iterations in place and returns sigma = u^T W v.
double power_iteration(const Tensor& weight, SpectralNormState& state, int iterations);

// weight / sigma, with sigma the power-iteration estimate after
// `iterations` in-place updates of `state` (0 reuses the stored vectors).
// The gradient treats u and v as constants; sigma below 1e-12 is clamped.
Tensor spectral_normalize(const Tensor& weight, SpectralNormState& state, int iterations = 1);

}  // namespace num
PGSGAN_NAMESPACE_END
