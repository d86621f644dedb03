#pragma once

#include <filesystem>

#include "litho/image.hpp"

namespace litho::pnm {

// Binary portable anymaps: P6 (RGB, maxval 255) and P5 (gray, maxval 255).
// Masks are stored as P5 with 0 = background and 255 = stone; on load any
// nonzero sample reads as stone.

void write_ppm(const std::filesystem::path& path, const RgbImage& img);
RgbImage read_ppm(const std::filesystem::path& path);

void write_mask_pgm(const std::filesystem::path& path, const StoneMask& mask);
StoneMask read_mask_pgm(const std::filesystem::path& path);

}  // namespace litho::pnm
