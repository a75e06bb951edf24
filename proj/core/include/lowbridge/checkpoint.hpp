#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lowbridge/model.hpp"

namespace lowbridge {

// Binary checkpoint layout (all integers little-endian):
//   "LBCK" | u32 version=1 | u32 tensor_count |
//   per tensor: u32 name_len | name bytes | u8 dtype (0 = f32) | u8 rank |
//               rank x u64 dims | f32 payload |
//   u64 CRC-64 (XZ polynomial) of every preceding byte.
// A JSON sidecar <path>.meta.json stores the ModelSpec, seed and epoch.

struct LoadResult {
    ParameterSet params;
    bool checksum_ok = true;
};

void save_checkpoint(const ParameterSet& params, const std::string& path);

// Loads tensors and metadata. A checksum mismatch does not throw: the data is
// returned with checksum_ok=false so callers can decide what to do.
LoadResult load_checkpoint(const std::string& path);

std::uint64_t crc64_xz(const std::uint8_t* data, std::size_t size);

} // namespace lowbridge
