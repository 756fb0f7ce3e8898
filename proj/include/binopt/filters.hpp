#pragma once

#include "binopt/image.hpp"

namespace binopt {

/// Windowed median with replicate border padding. Sliding column-histogram
/// implementation; the per-pixel cost does not grow with the window.
/// The window must be odd and >= 1; it may exceed the image dimensions.
GrayImage median_filter(const GrayImage& img, int window);

/// Windowed arithmetic mean with replicate border padding, computed through a
/// summed-area table over the padded image. Window must be odd and >= 1.
ImageF mean_filter(const ImageF& img, int window);

}  // namespace binopt
