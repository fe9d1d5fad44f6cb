#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "dscjscc/model.hpp"

namespace dscjscc {

// Layout (all integers little-endian u32):
//   "DSCJ" | version | header length | header (JSON text: architecture,
//   variant, rho, c, k, n, transmit power) | tensor count |
//   per tensor: name length, name, rank, dims..., float32 values.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const CodecModel& model);
CodecModel deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const CodecModel& model, const std::filesystem::path& path);
CodecModel load_checkpoint(const std::filesystem::path& path);

}  // namespace dscjscc
