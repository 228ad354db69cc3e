#pragma once

#include <cstdint>
#include <vector>

namespace pgsgan::data {

// Per-epoch shuffled index batches. Epoch e is shuffled with the stream
// derived from (seed, "batcher:epoch:<e>"), so any epoch can be rebuilt
// without replaying earlier ones.
class Batcher {
 public:
  enum class Mode { training, evaluation };

  Batcher(std::size_t num_items, std::size_t batch_size, std::uint64_t seed);

  // training drops the final short batch; evaluation keeps it.
  std::vector<std::vector<std::size_t>> epoch(std::uint64_t epoch_index, Mode mode = Mode::training) const;
  std::size_t batches_per_epoch(Mode mode = Mode::training) const;

 private:
  std::size_t num_items_;
  std::size_t batch_size_;
  std::uint64_t seed_;
};

}  // namespace pgsgan::data
