#include "pgsgan/evalkit/curves.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pgsgan/errors.hpp"
#include "pgsgan/gan/policy.hpp"
#include "pgsgan/kvfile.hpp"

namespace pgsgan::eval {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ls(line);
  std::string f;
  while (std::getline(ls, f, ',')) out.push_back(f);
  return out;
}

template <typename T>
T parse(const std::string& s, const std::filesystem::path& path, int lineno) {
  T v{};
  if (s == "inf" || s == "nan") {
    if constexpr (std::is_floating_point_v<T>) return s == "inf" ? INFINITY : NAN;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError(path.string() + ": line " + std::to_string(lineno) + ": malformed value '" + s + "'");
  }
  return v;
}

template <typename Row, typename Fill>
std::vector<Row> read_log(const std::filesystem::path& path, const char* header, std::size_t ncols,
                          Fill fill) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open log " + path.string());
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line) || line != header) {
    throw DataError(path.string() + ": line 1: expected header `" + std::string(header) + "`");
  }
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != ncols) {
      throw DataError(path.string() + ": line " + std::to_string(lineno) + ": expected " +
                      std::to_string(ncols) + " columns, found " + std::to_string(f.size()));
    }
    rows.push_back(fill(f, lineno));
  }
  return rows;
}

}  // namespace

std::string format_step_row(const StepMetrics& m) {
  return std::to_string(m.epoch) + ',' + std::to_string(m.step) + ',' + format_double(m.loss_c) +
         ',' + format_double(m.loss_g) + ',' + format_double(m.nll_real_mean) + ',' +
         format_double(m.entropy_mean);
}

std::string format_valid_row(const ValidationMetrics& m) {
  return std::to_string(m.epoch) + ',' + format_double(m.kld) + ',' + format_double(m.mse) + ',' +
         format_double(m.nll_mean) + ',' + format_double(m.entropy_mean);
}

std::vector<StepMetrics> read_step_log(const std::filesystem::path& path) {
  return read_log<StepMetrics>(path, kStepLogHeader, 6, [&](const auto& f, int ln) {
    StepMetrics m;
    m.epoch = parse<std::int64_t>(f[0], path, ln);
    m.step = parse<std::int64_t>(f[1], path, ln);
    m.loss_c = parse<double>(f[2], path, ln);
    m.loss_g = parse<double>(f[3], path, ln);
    m.nll_real_mean = parse<double>(f[4], path, ln);
    m.entropy_mean = parse<double>(f[5], path, ln);
    return m;
  });
}

std::vector<ValidationMetrics> read_valid_log(const std::filesystem::path& path) {
  return read_log<ValidationMetrics>(path, kValidLogHeader, 5, [&](const auto& f, int ln) {
    ValidationMetrics m;
    m.epoch = parse<std::int64_t>(f[0], path, ln);
    m.kld = parse<double>(f[1], path, ln);
    m.mse = parse<double>(f[2], path, ln);
    m.nll_mean = parse<double>(f[3], path, ln);
    m.entropy_mean = parse<double>(f[4], path, ln);
    return m;
  });
}

LearningCurves learning_curves(const std::vector<StepMetrics>& steps,
                               const std::vector<ValidationMetrics>& valid) {
  LearningCurves c;
  c.nll_by_chance = std::log(static_cast<double>(order::kNumClasses));
  c.entropy_by_chance = std::log2(static_cast<double>(order::kNumClasses));
  std::map<std::int64_t, std::array<double, 5>> acc;  // sums + count
  for (const auto& s : steps) {
    auto& a = acc[s.epoch];
    a[0] += s.loss_c;
    a[1] += s.loss_g;
    a[2] += s.nll_real_mean;
    a[3] += s.entropy_mean;
    a[4] += 1.0;
  }
  std::map<std::int64_t, ValidationMetrics> by_epoch;
  for (const auto& v : valid) by_epoch[v.epoch] = v;
  for (const auto& [epoch, a] : acc) {
    c.epochs.push_back(epoch);
    c.series["loss_c"].push_back(a[0] / a[4]);
    c.series["loss_g"].push_back(a[1] / a[4]);
    c.series["nll"].push_back(a[2] / a[4]);
    c.series["entropy"].push_back(a[3] / a[4]);
    if (!valid.empty()) {
      auto it = by_epoch.find(epoch);
      const double nan = std::nan("");
      c.series["kld"].push_back(it == by_epoch.end() ? nan : it->second.kld);
      c.series["mse"].push_back(it == by_epoch.end() ? nan : it->second.mse);
      c.series["nll_valid"].push_back(it == by_epoch.end() ? nan : it->second.nll_mean);
      c.series["entropy_valid"].push_back(it == by_epoch.end() ? nan : it->second.entropy_mean);
    }
  }
  return c;
}

void write_curves(const LearningCurves& curves, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, values] : curves.series) {
    double reference = std::nan("");
    if (name.rfind("nll", 0) == 0) reference = curves.nll_by_chance;
    if (name.rfind("entropy", 0) == 0) reference = curves.entropy_by_chance;
    const auto path = dir / ("curve_" + name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path.string());
    out << (std::isnan(reference) ? "epoch,value\n" : "epoch,value,by_chance\n");
    for (std::size_t i = 0; i < values.size(); ++i) {
      out << curves.epochs[i] << ',' << format_double(values[i]);
      if (!std::isnan(reference)) out << ',' << format_double(reference);
      out << '\n';
    }
  }
}

}  // namespace pgsgan::eval
