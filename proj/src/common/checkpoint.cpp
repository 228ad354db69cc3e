#include "pgsgan/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pgsgan/errors.hpp"

namespace pgsgan {
namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

class Reader {
 public:
  Reader(const std::vector<unsigned char>& buf, std::size_t begin, std::size_t end, std::string origin)
      : buf_(buf), end_(end), origin_(std::move(origin)), pos_(begin) {}

  bool done() const { return pos_ == end_; }

  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw DataError(origin_ + ": truncated checkpoint");
  }
  std::uint64_t uint(int bytes) {
    need(bytes);
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += bytes;
    return v;
  }
  std::string text(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  const std::vector<unsigned char>& buf_;
  std::size_t end_;
  std::string origin_;
  std::size_t pos_;
};

}  // namespace

std::uint32_t crc32_of(const void* data, std::size_t size) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, static_cast<const Bytef*>(data), static_cast<uInt>(size)));
}

void write_checkpoint(const std::filesystem::path& path, const std::vector<CheckpointRecord>& records) {
  std::vector<unsigned char> out{'P', 'G', 'S', 'G'};
  put_u32(out, kCheckpointVersion);
  for (const auto& r : records) {
    put_u32(out, static_cast<std::uint32_t>(r.name.size()));
    out.insert(out.end(), r.name.begin(), r.name.end());
    const bool is_f64 = std::holds_alternative<std::vector<double>>(r.values);
    out.push_back(is_f64 ? 1 : 0);
    put_u32(out, static_cast<std::uint32_t>(r.dims.size()));
    for (auto d : r.dims) put_u64(out, d);
    if (is_f64) {
      for (double v : std::get<std::vector<double>>(r.values)) put_u64(out, std::bit_cast<std::uint64_t>(v));
    } else {
      for (float v : std::get<std::vector<float>>(r.values)) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
  }
  put_u32(out, crc32_of(out.data(), out.size()));

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw UsageError("cannot write " + tmp);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw UsageError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::vector<CheckpointRecord> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const std::string origin = path.string();
  if (buf.size() < 12 || std::memcmp(buf.data(), "PGSG", 4) != 0) {
    throw DataError(origin + ": not a checkpoint (bad magic)");
  }
  const std::size_t body = buf.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(buf[body + i]) << (8 * i);
  if (crc32_of(buf.data(), body) != stored) throw DataError(origin + ": CRC mismatch (corrupt checkpoint)");

  Reader r(buf, 4, body, origin);
  const auto version = r.uint(4);
  if (version != kCheckpointVersion) {
    throw DataError(origin + ": unsupported checkpoint version " + std::to_string(version));
  }
  std::vector<CheckpointRecord> records;
  while (!r.done()) {
    CheckpointRecord rec;
    rec.name = r.text(r.uint(4));
    const auto dtype = r.uint(1);
    if (dtype > 1) throw DataError(origin + ": unknown dtype tag in `" + rec.name + "`");
    const auto rank = r.uint(4);
    std::uint64_t count = 1;
    for (std::uint64_t i = 0; i < rank; ++i) {
      rec.dims.push_back(r.uint(8));
      count *= rec.dims.back();
    }
    if (dtype == 1) {
      r.need(count * 8);
      std::vector<double> v(count);
      for (auto& x : v) x = std::bit_cast<double>(r.uint(8));
      rec.values = std::move(v);
    } else {
      r.need(count * 4);
      std::vector<float> v(count);
      for (auto& x : v) x = std::bit_cast<float>(static_cast<std::uint32_t>(r.uint(4)));
      rec.values = std::move(v);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace pgsgan
