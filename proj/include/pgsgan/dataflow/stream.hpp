#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pgsgan/orderdomain/order.hpp"

namespace pgsgan::data {

struct StreamMeta {
  double tick_size = 1.0;
  double min_volume_unit = 1.0;
  std::string instrument = "unknown";
};

// Chronological orders with their pre-order best quotes. Every RawOrder
// carries the stream's tick size and volume unit.
struct OrderStream {
  StreamMeta meta;
  std::vector<std::int64_t> seq;
  std::vector<order::RawOrder> orders;
  // 1-based data-row numbers in the source file (0 when synthesized).
  std::vector<std::size_t> source_rows;

  std::size_t size() const { return orders.size(); }
  bool empty() const { return orders.empty(); }
  OrderStream slice(std::size_t begin, std::size_t end) const;
  void push_back(std::int64_t s, const order::RawOrder& o, std::size_t row = 0);
  // Strict seq ordering plus RawOrder invariants; throws DataError.
  void validate() const;
};

inline constexpr std::size_t kMinStreamRows = order::kHistoryLength + 1;

// `path` is the CSV; metadata comes from the sidecar with the same basename
// and a `.meta` extension.
//   seq,side,action,is_mo,price,volume,best_bid,best_ask
OrderStream load_orders(const std::filesystem::path& path);
void save_orders(const OrderStream& stream, const std::filesystem::path& path);
std::filesystem::path meta_path_for(const std::filesystem::path& csv_path);

struct Split {
  OrderStream train;
  OrderStream valid;
  OrderStream test;
};

inline constexpr std::size_t kMinSplitRows = 30;

// Contiguous 8:1:1 chronological split: floor(0.8n), floor(0.1n), remainder.
Split temporal_split(const OrderStream& stream);

struct Window {
  order::Condition condition;
  order::Order target;
  // Position of the target order in the source stream.
  std::size_t target_index = 0;
};

// Stride-1 sliding windows: stream.size() - 20 pairs.
std::vector<Window> make_windows(const OrderStream& stream,
                                 order::PriceReference ref = order::PriceReference::opposite_best);

}  // namespace pgsgan::data
