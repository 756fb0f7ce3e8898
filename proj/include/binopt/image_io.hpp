#pragma once

#include <filesystem>

#include "binopt/image.hpp"

namespace binopt {

/// Load a grayscale image. P5 graymaps are read bit-exactly, P6 pixmaps are
/// reduced by BT.601 luminance (0.299 R + 0.587 G + 0.114 B), and PNG is
/// accepted when built with libpng. The format is detected from the file
/// contents, not the extension.
GrayImage load_image(const std::filesystem::path& path);

/// Write a binary P5 graymap ("P5\n<w> <h>\n255\n" + pixels), or an 8-bit gray
/// PNG when the extension is .png and PNG support is built in. The file is
/// written to a temporary name and renamed, so a failed save never leaves a
/// partial output behind.
void save_image(const GrayImage& img, const std::filesystem::path& path);

/// BinaryImage is saved with foreground = 0 and background = 255.
void save_image(const BinaryImage& img, const std::filesystem::path& path);

}  // namespace binopt
