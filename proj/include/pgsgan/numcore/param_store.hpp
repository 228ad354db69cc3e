#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "pgsgan/checkpoint.hpp"
#include "pgsgan/numcore/tensor.hpp"

PGSGAN_NAMESPACE_BEGIN
namespace num {

// Named tensors with stable identity: trainable parameters plus
// non-trainable buffers (spectral-norm vectors, running statistics).
// Insertion order is the serialization order.
class ParamStore {
 public:
  // Throws std::invalid_argument on a duplicate name.
  Tensor add(const std::string& name, const Shape& shape, std::vector<real> values, bool trainable);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Tensor get(const std::string& name) const;
  bool is_trainable(const std::string& name) const;

  const std::vector<std::string>& names() const { return names_; }
  std::vector<std::string> trainable_names() const;
  std::size_t trainable_count() const;  // number of scalars

  void zero_grad();

  std::vector<CheckpointRecord> to_records(const std::string& prefix = {}) const;
  // Copies values by name; every stored tensor must be present with the
  // same shape. Records whose names lack `prefix` are ignored.
  void load_records(const std::vector<CheckpointRecord>& records, const std::string& prefix = {});

  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  struct Entry {
    Tensor tensor;
    bool trainable;
  };
  std::vector<std::string> names_;
  std::unordered_map<std::string, Entry> index_;
};

}  // namespace num
PGSGAN_NAMESPACE_END
