#pragma once

#include "deepproj/network.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace deepproj {

inline constexpr char kModelMagic[4] = {'N', 'N', 'P', 'M'};
inline constexpr std::uint16_t kModelFormatVersion = 1;

/// Binary layout, all integers and floats little-endian:
///   "NNPM", u16 version, u32 layer count L, (L+1) x u32 layer dims,
///   f64 weights layer by layer (fan_in x fan_out, row-major), f64 biases,
///   input normalizer (min,max) pairs, target normalizer (min,max) pairs,
///   u32 byte length + UTF-8 JSON metadata.
std::string serialize_model(const NetworkModel& m);

/// Throws FormatError on bad magic, unsupported version or truncation.
NetworkModel deserialize_model(const std::string& bytes);

/// Writes through a temporary file and renames, so a failed save never
/// leaves a truncated model behind.
void save_model(const NetworkModel& m, const std::filesystem::path& path);
NetworkModel load_model(const std::filesystem::path& path);

}  // namespace deepproj
