#include <cstring>
#include <filesystem>

#include "doctest.h"
#include "nsstat/ensemble.hpp"
#include "nsstat/error.hpp"
#include "nsstat/snapshot_io.hpp"
#include "oracles.hpp"

using namespace nsstat;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("nsstat_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("NSF1 header layout") {
  const auto g = Grid::make(2, 8);
  const auto u = oracle::random_field(g, 1).with_metadata(0.25, 0.01);
  const auto bytes = encode_snapshot(u);
  REQUIRE(bytes.size() == 4 + 4 * 3 + 8 * 2 + 2 * 64 * 8);
  CHECK(std::memcmp(bytes.data(), "NSF1", 4) == 0);
  std::uint32_t n = 0;
  std::memcpy(&n, bytes.data() + 12, 4);
  CHECK(n == 8);
  double t = 0.0;
  std::memcpy(&t, bytes.data() + 24, 8);
  CHECK(t == 0.25);
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 32, 8);
  CHECK(first == u.component(0)[0]);
}

TEST_CASE("NSF1 round trip is bit exact") {
  for (int dim : {2, 3}) {
    const auto g = Grid::make(dim, 8);
    const auto u = oracle::random_field(g, 40 + dim).with_metadata(1.5, 3e-3);
    const auto bytes = encode_snapshot(u);
    const auto back = decode_snapshot(bytes);
    CHECK(back.time() == 1.5);
    CHECK(back.nu() == 3e-3);
    CHECK(max_abs_difference(back, u) == 0.0);
    CHECK(encode_snapshot(back) == bytes);
  }
}

TEST_CASE("NSF1 rejects malformed input") {
  const auto u = oracle::random_field(Grid::make(2, 8), 2);
  auto bytes = encode_snapshot(u);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_snapshot(bad_magic), FormatError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 8);
  CHECK_THROWS_AS(decode_snapshot(truncated), FormatError);
  auto bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(decode_snapshot(bad_version), FormatError);
  CHECK_THROWS_AS(decode_snapshot(std::span<const std::uint8_t>(bytes.data(), 10)), FormatError);
}

TEST_CASE("ensemble directory round trip is byte identical") {
  MeasureSpec spec;
  spec.k_max = 3;
  spec.seed = 99;
  const auto ens = sample_initial(spec, 3, Grid::make(2, 16), 0.01);
  const auto a = scratch("ens_a"), b = scratch("ens_b");
  write_ensemble(a, ens);
  const auto back = read_ensemble(a);
  CHECK(back.member_seeds == ens.member_seeds);
  CHECK(back.spec.seed == 99);
  write_ensemble(b, back);
  for (const auto& entry : fs::directory_iterator(a)) {
    CHECK(read_file_bytes(entry.path()) == read_file_bytes(b / entry.path().filename()));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}
