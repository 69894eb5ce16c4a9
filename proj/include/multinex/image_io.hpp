#pragma once

#include <string>

#include "multinex/tensor.hpp"

namespace multinex {

// Decodes a PNG (8/16-bit, gray/palette/RGB, alpha stripped) or binary PPM
// (P6, maxval up to 65535, 2-byte samples big-endian) into float RGB scaled
// to [0,1] by the format maximum. The container is detected from the file
// header, not the extension. Grayscale images are replicated to 3 channels.
// Throws std::runtime_error for unreadable files or corrupt content.
Tensor load_image(const std::string& path);

// Encodes an image with 1 or 3 channels as 8-bit PNG or binary PPM depending
// on the file extension. Values are clamped to [0,1], then quantized as
// round(v * 255).
void save_image(const std::string& path, const Tensor& img);

} // namespace multinex
