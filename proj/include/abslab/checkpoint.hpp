#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "abslab/mlp.hpp"

namespace abslab::net {

// Binary parameter checkpoint, all integers and floats little-endian:
//
//   uint64  layer count n
//   n x (uint64 fan_in, uint64 fan_out)
//   float64 values in MlpParams flat order
//
// The first n-1 layers are layer-normalized hidden layers, the last is the
// affine output layer, so the header fully determines the value count.
std::vector<std::uint8_t> encode_checkpoint(const MlpParams& params);
MlpParams decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const MlpParams& params);
MlpParams load_checkpoint(const std::filesystem::path& path);

}  // namespace abslab::net
