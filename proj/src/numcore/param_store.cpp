#include "pgsgan/numcore/param_store.hpp"

#include <stdexcept>

#include "pgsgan/errors.hpp"

PGSGAN_NAMESPACE_BEGIN
namespace num {

Tensor ParamStore::add(const std::string& name, const Shape& shape, std::vector<real> values, bool trainable) {
  if (contains(name)) throw std::invalid_argument("ParamStore: duplicate name `" + name + "`");
  Tensor t = Tensor::from(shape, std::move(values), trainable);
  names_.push_back(name);
  index_.emplace(name, Entry{t, trainable});
  return t;
}

Tensor ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("ParamStore: no tensor `" + name + "`");
  return it->second.tensor;
}

bool ParamStore::is_trainable(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("ParamStore: no tensor `" + name + "`");
  return it->second.trainable;
}

std::vector<std::string> ParamStore::trainable_names() const {
  std::vector<std::string> out;
  for (const auto& n : names_) {
    if (index_.at(n).trainable) out.push_back(n);
  }
  return out;
}

std::size_t ParamStore::trainable_count() const {
  std::size_t total = 0;
  for (const auto& n : names_) {
    const auto& e = index_.at(n);
    if (e.trainable) total += static_cast<std::size_t>(e.tensor.numel());
  }
  return total;
}

void ParamStore::zero_grad() {
  for (auto& [name, e] : index_) e.tensor.zero_grad();
}

std::vector<CheckpointRecord> ParamStore::to_records(const std::string& prefix) const {
  std::vector<CheckpointRecord> out;
  for (const auto& n : names_) {
    const Tensor& t = index_.at(n).tensor;
    CheckpointRecord r;
    r.name = prefix + n;
    for (auto d : t.shape()) r.dims.push_back(static_cast<std::uint64_t>(d));
    r.values = std::vector<real>(t.data().begin(), t.data().end());
    out.push_back(std::move(r));
  }
  return out;
}

void ParamStore::load_records(const std::vector<CheckpointRecord>& records, const std::string& prefix) {
  std::unordered_map<std::string, const CheckpointRecord*> by_name;
  for (const auto& r : records) {
    if (r.name.rfind(prefix, 0) == 0) by_name[r.name.substr(prefix.size())] = &r;
  }
  // Validate everything before touching any value.
  for (const auto& n : names_) {
    auto it = by_name.find(n);
    if (it == by_name.end()) throw DataError("checkpoint lacks tensor `" + prefix + n + "`");
    const Tensor& t = index_.at(n).tensor;
    std::vector<std::uint64_t> dims;
    for (auto d : t.shape()) dims.push_back(static_cast<std::uint64_t>(d));
    if (it->second->dims != dims) throw DataError("checkpoint tensor `" + prefix + n + "` has a different shape");
  }
  for (const auto& n : names_) {
    Tensor t = index_.at(n).tensor;
    auto dst = t.mutable_data();
    std::visit(
        [&](const auto& src) {
          for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<real>(src[i]);
        },
        by_name.at(n)->values);
  }
}

void ParamStore::save(const std::filesystem::path& path) const { write_checkpoint(path, to_records()); }

void ParamStore::load(const std::filesystem::path& path) { load_records(read_checkpoint(path)); }

}  // namespace num
PGSGAN_NAMESPACE_END
