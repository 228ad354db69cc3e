#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pgsgan {

// Flat `key = value` text format shared by configs, manifests, metadata
// sidecars and evaluation reports. Blank lines and `#` comments are ignored.
class KeyValues {
 public:
  KeyValues() = default;

  static KeyValues parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValues load(const std::filesystem::path& path);

  void save(const std::filesystem::path& path, const std::string& header_comment = {}) const;
  std::string to_string(const std::string& header_comment = {}) const;

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);
  void set(const std::string& key, int value) { set(key, static_cast<std::int64_t>(value)); }
  void set(const std::string& key, std::uint64_t value);
  void merge(const KeyValues& other);

  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;

  // Throws UsageError naming the first key not in `allowed`.
  void require_known(const std::set<std::string>& allowed, const std::string& context) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace pgsgan
