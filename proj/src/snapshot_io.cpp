#include "nsstat/snapshot_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "nsstat/error.hpp"

namespace nsstat {

static_assert(std::endian::native == std::endian::little,
              "NSF1 I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'N', 'S', 'F', '1'};
constexpr std::size_t kHeaderSize = 4 + 3 * 4 + 2 * 8;

template <class T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <class T>
T get(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw FormatError("NSF1: truncated file");
  T value;
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

std::vector<std::uint8_t> encode_snapshot(const VelocityField& field) {
  const auto& g = field.grid();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + g.points() * static_cast<std::size_t>(g.dim) * 8);
  out.insert(out.end(), kMagic, kMagic + 4);
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n));
  put<double>(out, field.nu());
  put<double>(out, field.time());
  for (int i = 0; i < g.dim; ++i) {
    const auto c = field.component(i);
    const auto* p = reinterpret_cast<const std::uint8_t*>(c.data());
    out.insert(out.end(), p, p + c.size() * sizeof(double));
  }
  return out;
}

VelocityField decode_snapshot(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("NSF1: bad magic bytes");
  }
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(bytes, pos);
  if (version != kSnapshotVersion) {
    throw FormatError("NSF1: unsupported version " + std::to_string(version));
  }
  const auto dim = static_cast<int>(get<std::uint32_t>(bytes, pos));
  const auto n = static_cast<int>(get<std::uint32_t>(bytes, pos));
  const double nu = get<double>(bytes, pos);
  const double time = get<double>(bytes, pos);
  Grid grid;
  try {
    grid = Grid::make(dim, n);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("NSF1: ") + e.what());
  }
  const std::size_t block = grid.points() * sizeof(double);
  if (bytes.size() != pos + block * static_cast<std::size_t>(dim)) {
    throw FormatError("NSF1: payload size does not match header");
  }
  std::vector<std::vector<double>> comps(static_cast<std::size_t>(dim),
                                         std::vector<double>(grid.points()));
  for (auto& c : comps) {
    std::memcpy(c.data(), bytes.data() + pos, block);
    pos += block;
  }
  return VelocityField(grid, std::move(comps), time, nu);
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_snapshot(const std::filesystem::path& path, const VelocityField& field) {
  write_file_bytes(path, encode_snapshot(field));
}

VelocityField read_snapshot(const std::filesystem::path& path) {
  return decode_snapshot(read_file_bytes(path));
}

}  // namespace nsstat
