#include "pgsgan/dataflow/stream.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pgsgan/errors.hpp"
#include "pgsgan/kvfile.hpp"

namespace pgsgan::data {
namespace {

constexpr const char* kHeader = "seq,side,action,is_mo,price,volume,best_bid,best_ask";

std::string row_label(std::size_t row) { return "row " + std::to_string(row); }

template <typename T>
T parse_field(const std::string& text, const char* field, std::size_t row) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError(row_label(row) + ": field `" + field + "` malformed: '" + text + "'");
  }
  return v;
}

}  // namespace

OrderStream OrderStream::slice(std::size_t begin, std::size_t end) const {
  OrderStream out;
  out.meta = meta;
  out.seq.assign(seq.begin() + begin, seq.begin() + end);
  out.orders.assign(orders.begin() + begin, orders.begin() + end);
  out.source_rows.assign(source_rows.begin() + begin, source_rows.begin() + end);
  return out;
}

void OrderStream::push_back(std::int64_t s, const order::RawOrder& o, std::size_t row) {
  seq.push_back(s);
  orders.push_back(o);
  source_rows.push_back(row);
}

void OrderStream::validate() const {
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const std::size_t row = source_rows[i] ? source_rows[i] : i + 1;
    if (i > 0 && seq[i] <= seq[i - 1]) {
      throw DataError(row_label(row) + ": seq not strictly increasing");
    }
    try {
      orders[i].validate();
    } catch (const DataError& e) {
      throw DataError(row_label(row) + ": " + e.what());
    }
  }
}

std::filesystem::path meta_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".meta");
  return p;
}

OrderStream load_orders(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open order file " + path.string());

  OrderStream stream;
  const auto meta_path = meta_path_for(path);
  if (!std::filesystem::exists(meta_path)) {
    throw DataError("missing metadata sidecar " + meta_path.string());
  }
  try {
    const KeyValues meta = KeyValues::load(meta_path);
    meta.require_known({"tick_size", "min_volume_unit", "instrument"}, meta_path.string());
    stream.meta.tick_size = meta.get_double("tick_size");
    stream.meta.min_volume_unit = meta.get_double("min_volume_unit");
    stream.meta.instrument = meta.get_or("instrument", "unknown");
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
  if (!(stream.meta.tick_size > 0) || !(stream.meta.min_volume_unit > 0)) {
    throw DataError(meta_path.string() + ": tick_size and min_volume_unit must be positive");
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(path.string() + ": empty order stream (at least " +
                    std::to_string(kMinStreamRows) + " rows are needed for one window)");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw DataError(path.string() + ": header must be `" + kHeader + "`");

  std::size_t row = 0;
  std::vector<std::string> fields;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    fields.clear();
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != 8) {
      throw DataError(row_label(row) + ": expected 8 fields, found " + std::to_string(fields.size()));
    }
    order::RawOrder o;
    const auto s = parse_field<std::int64_t>(fields[0], "seq", row);
    o.side = parse_field<int>(fields[1], "side", row);
    o.action = parse_field<int>(fields[2], "action", row);
    o.is_mo = parse_field<int>(fields[3], "is_mo", row);
    o.raw_price = parse_field<double>(fields[4], "price", row);
    o.raw_volume = parse_field<double>(fields[5], "volume", row);
    o.best_bid = parse_field<double>(fields[6], "best_bid", row);
    o.best_ask = parse_field<double>(fields[7], "best_ask", row);
    o.tick_size = stream.meta.tick_size;
    o.min_volume_unit = stream.meta.min_volume_unit;
    stream.push_back(s, o, row);
  }
  if (stream.empty()) {
    throw DataError(path.string() + ": empty order stream (at least " +
                    std::to_string(kMinStreamRows) + " rows are needed for one window)");
  }
  if (stream.size() < kMinStreamRows) {
    throw DataError(path.string() + ": " + std::to_string(stream.size()) + " rows; at least " +
                    std::to_string(kMinStreamRows) + " are needed for one window");
  }
  stream.validate();
  return stream;
}

void save_orders(const OrderStream& stream, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path.string());
    out << kHeader << '\n';
    for (std::size_t i = 0; i < stream.size(); ++i) {
      const auto& o = stream.orders[i];
      out << stream.seq[i] << ',' << o.side << ',' << o.action << ',' << o.is_mo << ','
          << format_double(o.raw_price) << ',' << format_double(o.raw_volume) << ','
          << format_double(o.best_bid) << ',' << format_double(o.best_ask) << '\n';
    }
    if (!out) throw UsageError("write failed: " + path.string());
  }
  KeyValues meta;
  meta.set("tick_size", stream.meta.tick_size);
  meta.set("min_volume_unit", stream.meta.min_volume_unit);
  meta.set("instrument", stream.meta.instrument);
  meta.save(meta_path_for(path));
}

Split temporal_split(const OrderStream& stream) {
  const std::size_t n = stream.size();
  if (n < kMinSplitRows) {
    throw DataError("temporal_split: stream has " + std::to_string(n) + " orders, need at least " +
                    std::to_string(kMinSplitRows));
  }
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_valid = n / 10;
  return {stream.slice(0, n_train), stream.slice(n_train, n_train + n_valid),
          stream.slice(n_train + n_valid, n)};
}

std::vector<Window> make_windows(const OrderStream& stream, order::PriceReference ref) {
  if (stream.size() < kMinStreamRows) {
    throw DataError("make_windows: need at least " + std::to_string(kMinStreamRows) +
                    " orders, got " + std::to_string(stream.size()));
  }
  constexpr std::size_t h = order::kHistoryLength;
  std::vector<Window> windows;
  windows.reserve(stream.size() - h);
  for (std::size_t k = 0; k + h < stream.size(); ++k) {
    const auto& next = stream.orders[k + h];
    Window w;
    w.condition = order::encode_condition(
        std::span<const order::RawOrder>(stream.orders.data() + k, h),
        order::Quote{next.best_bid, next.best_ask}, ref);
    w.target = order::discretize(next, ref);
    w.target_index = k + h;
    windows.push_back(w);
  }
  return windows;
}

}  // namespace pgsgan::data
