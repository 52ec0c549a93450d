#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nsstat/field.hpp"

namespace nsstat {

/// NSF1 snapshot: little-endian "NSF1", u32 version (1), u32 dim, u32 n,
/// f64 nu, f64 time, then dim blocks of n^dim f64 real-space values with the
/// x index fastest.
inline constexpr std::uint32_t kSnapshotVersion = 1;

std::vector<std::uint8_t> encode_snapshot(const VelocityField& field);
VelocityField decode_snapshot(std::span<const std::uint8_t> bytes);

void write_snapshot(const std::filesystem::path& path, const VelocityField& field);
VelocityField read_snapshot(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace nsstat
