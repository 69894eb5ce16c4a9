#pragma once

#include <string>

#include "multinex/nn.hpp"

namespace multinex::checkpoint {

// Binary checkpoint layout:
//   bytes 0..3   magic "MNX1"
//   bytes 4..7   u32 little-endian manifest length in bytes
//   manifest     JSON array of {name, shape:[h,w,c], offset, count, dtype:"f32le"};
//                entries appear in registry order, offset is a byte offset
//                into the data blob
//   blob         concatenated float32 little-endian tensor data
// Saving the same parameters twice produces byte-identical files.

void save(const std::string& path, const nn::ModelParams& params);

// Loads into an allocated parameter set; the manifest must match the model's
// registry exactly (same order, names, shapes). The first offending layer is
// named in the error.
void load(const std::string& path, nn::ModelParams& params);

} // namespace multinex::checkpoint
