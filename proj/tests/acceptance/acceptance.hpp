#pragma once

#include <string>

namespace acceptance {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// 64-bit checks, compiled against the double-precision library.
Outcome by_chance_constants();
Outcome gradient_correctness();
Outcome spectral_normalization();
Outcome reinforce_oracle();
Outcome metric_oracles();
Outcome hinge_saturation();
Outcome discreteness();

// Training-precision checks.
Outcome end_to_end();
Outcome determinism();

}  // namespace acceptance
