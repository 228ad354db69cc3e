#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace pgsgan {

// Binary tensor checkpoint:
//   "PGSG" | u32 version | records... | u32 CRC32 of all preceding bytes
// record: u32 name length | name bytes | u8 dtype (0 = f32, 1 = f64) |
//         u32 rank | u64 dims[rank] | little-endian values
struct CheckpointRecord {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::variant<std::vector<float>, std::vector<double>> values;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const std::filesystem::path& path, const std::vector<CheckpointRecord>& records);
// Throws DataError on bad magic, unsupported version, truncation or CRC mismatch.
std::vector<CheckpointRecord> read_checkpoint(const std::filesystem::path& path);

std::uint32_t crc32_of(const void* data, std::size_t size);

}  // namespace pgsgan
