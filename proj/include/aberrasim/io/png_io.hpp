#pragma once

#include <string>

#include "aberrasim/img/image.hpp"

namespace aberrasim {

/// Reads an 8- or 16-bit gray/RGB PNG into a linear [0,1] float buffer.
/// Palette images are expanded, alpha is dropped.  Throws std::runtime_error
/// on I/O or decode failure.
ImageBuffer<float> read_png(const std::string& path);

/// Writes a [0,1] float buffer as PNG with the given bit depth (8 or 16).
/// Values are clamped before quantization.  Output carries no ancillary
/// chunks, so identical buffers produce identical files.
void write_png(const std::string& path, const ImageBuffer<float>& img,
               int bit_depth = 16);

}  // namespace aberrasim
