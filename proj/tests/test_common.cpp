#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "pgsgan/checkpoint.hpp"
#include "pgsgan/errors.hpp"
#include "pgsgan/kvfile.hpp"
#include "pgsgan/rng.hpp"

using namespace pgsgan;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("pgsgan_common_" + name); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

}  // namespace

TEST_CASE("rng streams are reproducible and label-separated") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(Rng::derive_seed(7, "x") == Rng::derive_seed(7, "x"));
  CHECK(Rng::derive_seed(7, "x") != Rng::derive_seed(7, "y"));
  CHECK(Rng::derive_seed(7, "x") != Rng::derive_seed(8, "x"));
}

TEST_CASE("rng state save and restore continues the same stream") {
  Rng a(3);
  for (int i = 0; i < 10; ++i) a.uniform();
  const auto s = a.state();
  std::vector<double> first;
  for (int i = 0; i < 5; ++i) first.push_back(a.normal());
  Rng b;
  b.restore(s);
  for (int i = 0; i < 5; ++i) CHECK(b.normal() == first[i]);
  CHECK_THROWS_AS(b.restore("not a state"), DataError);
}

TEST_CASE("rng helpers stay within range and match their distributions") {
  Rng r(1);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::fabs(sum / n) < 0.01);
  CHECK(std::fabs(sq / n - 1.0) < 0.02);
  std::array<int, 3> counts{};
  const std::array<double, 3> p{0.2, 0.5, 0.3};
  for (int i = 0; i < n; ++i) ++counts[r.categorical(p)];
  for (int k = 0; k < 3; ++k) CHECK(std::fabs(counts[k] / double(n) - p[k]) < 0.005);
  for (int i = 0; i < 1000; ++i) CHECK(r.below(7) < 7u);
  CHECK_THROWS_AS(r.below(0), std::invalid_argument);
}

TEST_CASE("key-value parsing") {
  const auto kv = KeyValues::parse("# comment\n a = 1 \n\nname = hello world\nlist = 1, 2.5,3\n");
  CHECK(kv.get_int("a") == 1);
  CHECK(kv.get("name") == "hello world");
  CHECK(kv.get_doubles("list") == std::vector<double>{1, 2.5, 3});
  CHECK(kv.get_or("missing", "x") == "x");
  CHECK_THROWS_AS(kv.get("missing"), UsageError);
  CHECK_THROWS_AS(kv.get_int("name"), UsageError);
  CHECK_THROWS_AS(KeyValues::parse("novalue\n"), UsageError);
  CHECK_THROWS_AS(KeyValues::parse("a = 1\na = 2\n"), UsageError);
  CHECK_THROWS_AS(kv.require_known({"a", "name"}, "cfg"), UsageError);
  CHECK_NOTHROW(kv.require_known({"a", "name", "list"}, "cfg"));
}

TEST_CASE("key-value values round-trip through text") {
  KeyValues kv;
  kv.set("lr", 1e-5);
  kv.set("third", 1.0 / 3.0);
  kv.set("big", 1e20);
  kv.set("n", 100000);
  kv.set("seed", std::uint64_t{18446744073709551615ull});
  const auto back = KeyValues::parse(kv.to_string("header"));
  CHECK(back.get_double("lr") == 1e-5);
  CHECK(back.get_double("third") == 1.0 / 3.0);
  CHECK(back.get_double("big") == 1e20);
  CHECK(back.get("n") == "100000");
  CHECK(back.get_u64_or("seed", 0) == 18446744073709551615ull);
  CHECK(format_double(100000.0) == "100000");
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(INFINITY) == "inf");
}

TEST_CASE("crc32 matches the standard check value") {
  const std::string s = "123456789";
  CHECK(crc32_of(s.data(), s.size()) == 0xCBF43926u);
}

TEST_CASE("checkpoint records round-trip exactly") {
  const auto path = temp_file("rt.pgsg");
  std::vector<CheckpointRecord> recs;
  recs.push_back({"a", {2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6.5f}});
  recs.push_back({"b/c", {1}, std::vector<double>{1.0 / 3.0}});
  write_checkpoint(path, recs);
  const auto back = read_checkpoint(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].name == "a");
  CHECK(back[0].dims == std::vector<std::uint64_t>{2, 3});
  CHECK(std::get<std::vector<float>>(back[0].values) == std::get<std::vector<float>>(recs[0].values));
  CHECK(std::get<std::vector<double>>(back[1].values)[0] == 1.0 / 3.0);
  fs::remove(path);
}

TEST_CASE("corrupt, truncated or foreign checkpoints are rejected") {
  const auto path = temp_file("bad.pgsg");
  write_checkpoint(path, {{"w", {4}, std::vector<double>{1, 2, 3, 4}}});
  const auto good = slurp(path);

  for (std::size_t pos : {std::size_t{4}, good.size() / 2, good.size() - 1}) {
    auto bytes = good;
    bytes[pos] ^= 0x01;
    spit(path, bytes);
    CHECK_THROWS_AS(read_checkpoint(path), DataError);
  }
  spit(path, good.substr(0, good.size() - 9));
  CHECK_THROWS_AS(read_checkpoint(path), DataError);
  spit(path, "XXXX" + good.substr(4));
  CHECK_THROWS_AS(read_checkpoint(path), DataError);
  fs::remove(path);
  CHECK_THROWS_AS(read_checkpoint(path), DataError);
}
