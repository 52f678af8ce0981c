#pragma once

#include <filesystem>

#include "wsseg/grid.hpp"

namespace wsseg {

// Interchange formats. Masks travel as binary PGM ("P5", maxval 255) with
// 0 -> background and 255 -> foreground. Images and weight maps travel as
// grayscale PFM ("Pf") with scale line "-1.0" (little-endian payload) and the
// standard bottom-to-top scanline order. Writers emit a canonical byte layout
// so write(read(f)) == f for files this library produced.
//
// Parse failures throw FormatError naming the offending byte offset.

Mask read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Mask& mask);

Grid<float> read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const Grid<float>& grid);

}  // namespace wsseg
