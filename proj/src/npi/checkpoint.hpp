#pragma once

#include <cstdint>
#include <string>

#include "npi/model.hpp"

namespace npi {

// Binary checkpoint: "NPIR" magic, format version, task id, encoder variant,
// dimension table and seed, then named parameter matrices as little-endian
// 32-bit floats. A JSON manifest with per-tensor shapes and checksums is
// written next to it at <path>.json.
void save_checkpoint(const Params<float>& params, const std::string& path);
Params<float> load_checkpoint(const std::string& path);

uint64_t fnv1a64(const void* data, size_t len);
std::string file_checksum_hex(const std::string& path);

}  // namespace npi
