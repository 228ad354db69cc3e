#include "pgsgan/kvfile.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pgsgan/errors.hpp"

namespace pgsgan {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[512];
  const double a = std::fabs(v);
  const bool fixed = a == 0.0 || (a >= 1e-4 && a < 1e16);
  auto [ptr, ec] = fixed ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                         : std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

KeyValues KeyValues::parse(const std::string& text, const std::string& origin) {
  KeyValues kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError(origin + ":" + std::to_string(lineno) + ": expected `key = value`");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) {
      throw UsageError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    if (kv.contains(key)) {
      throw UsageError(origin + ":" + std::to_string(lineno) + ": duplicate key `" + key + "`");
    }
    kv.set(key, trim(t.substr(eq + 1)));
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::string KeyValues::to_string(const std::string& header_comment) const {
  std::ostringstream os;
  if (!header_comment.empty()) {
    std::istringstream hc(header_comment);
    std::string l;
    while (std::getline(hc, l)) os << "# " << l << '\n';
  }
  for (const auto& k : order_) os << k << " = " << values_.at(k) << '\n';
  return os.str();
}

void KeyValues::save(const std::filesystem::path& path, const std::string& header_comment) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << to_string(header_comment);
  if (!out) throw UsageError("write failed: " + path.string());
}

void KeyValues::set(const std::string& key, const std::string& value) {
  if (!contains(key)) order_.push_back(key);
  values_[key] = value;
}

void KeyValues::set(const std::string& key, double value) { set(key, format_double(value)); }
void KeyValues::set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
void KeyValues::set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }

void KeyValues::merge(const KeyValues& other) {
  for (const auto& k : other.order_) set(k, other.values_.at(k));
}

const std::string& KeyValues::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError(origin_ + ": missing key `" + key + "`");
  return it->second;
}

std::string KeyValues::get_or(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key) const {
  const std::string& s = get(key);
  if (s == "inf") return INFINITY;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError(origin_ + ": key `" + key + "` is not a number: " + s);
  }
  return v;
}

double KeyValues::get_double_or(const std::string& key, double fallback) const {
  return contains(key) ? get_double(key) : fallback;
}

std::int64_t KeyValues::get_int(const std::string& key) const {
  const std::string& s = get(key);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError(origin_ + ": key `" + key + "` is not an integer: " + s);
  }
  return v;
}

std::int64_t KeyValues::get_int_or(const std::string& key, std::int64_t fallback) const {
  return contains(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValues::get_u64_or(const std::string& key, std::uint64_t fallback) const {
  if (!contains(key)) return fallback;
  const std::string& s = get(key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError(origin_ + ": key `" + key + "` is not an unsigned integer: " + s);
  }
  return v;
}

std::vector<double> KeyValues::get_doubles(const std::string& key) const {
  std::vector<double> out;
  std::istringstream in(get(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    double v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
      throw UsageError(origin_ + ": key `" + key + "` has a non-numeric item: " + t);
    }
    out.push_back(v);
  }
  return out;
}

void KeyValues::require_known(const std::set<std::string>& allowed, const std::string& context) const {
  for (const auto& k : order_) {
    if (!allowed.count(k)) throw UsageError(context + ": unknown key `" + k + "`");
  }
}

}  // namespace pgsgan
