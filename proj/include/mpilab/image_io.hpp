#pragma once

#include <filesystem>

#include "mpilab/image.hpp"

namespace mpilab {

/// Quantizes to round(v * 65535) after clamping to [0,1]; 1/3/4 channels
/// map to gray/RGB/RGBA. Encoder settings are fixed so output is byte-stable.
void write_png16(const std::filesystem::path& path, const Image& img);

/// 8-bit variant, round(v * 255).
void write_png8(const std::filesystem::path& path, const Image& img);

/// Reads 8- or 16-bit gray/gray+alpha/RGB/RGBA; palette images are expanded.
/// Gray+alpha is returned as 4 channels. Values are scaled to [0,1].
Image read_png(const std::filesystem::path& path);

/// Bit depth of a PNG file on disk (8 or 16).
int png_bit_depth(const std::filesystem::path& path);

}  // namespace mpilab
