#pragma once

#include <filesystem>

#include "latentforge/image.hpp"

namespace latentforge {

/// Binary PPM (magic "P6", maxval 255). Channels are quantized by
/// round-half-up of clamp(v, 0, 1) * 255.
void write_ppm(const ImageGrid& image, const std::filesystem::path& path);

/// Reads a binary PPM written by write_ppm (maxval must be 255).
ImageGrid read_ppm(const std::filesystem::path& path);

}  // namespace latentforge
