#include "pgsgan/dataflow/batcher.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "pgsgan/rng.hpp"

namespace pgsgan::data {

Batcher::Batcher(std::size_t num_items, std::size_t batch_size, std::uint64_t seed)
    : num_items_(num_items), batch_size_(batch_size), seed_(seed) {
  if (batch_size < 2) throw std::invalid_argument("Batcher: batch_size must be at least 2");
}

std::size_t Batcher::batches_per_epoch(Mode mode) const {
  const std::size_t full = num_items_ / batch_size_;
  return mode == Mode::training || num_items_ % batch_size_ == 0 ? full : full + 1;
}

std::vector<std::vector<std::size_t>> Batcher::epoch(std::uint64_t epoch_index, Mode mode) const {
  std::vector<std::size_t> perm(num_items_);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = Rng::derive(seed_, "batcher:epoch:" + std::to_string(epoch_index));
  for (std::size_t i = num_items_; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t b = 0; b < batches_per_epoch(mode); ++b) {
    const std::size_t begin = b * batch_size_;
    const std::size_t end = std::min(begin + batch_size_, num_items_);
    batches.emplace_back(perm.begin() + begin, perm.begin() + end);
  }
  return batches;
}

}  // namespace pgsgan::data
