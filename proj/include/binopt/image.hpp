#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "binopt/error.hpp"

namespace binopt {

namespace detail {
inline std::size_t checked_size(int w, int h) {
    if (w < 1 || h < 1) throw ParameterError("image dimensions must be at least 1x1");
    return std::size_t(w) * std::size_t(h);
}
}  // namespace detail

/// 8-bit grayscale raster, row-major, origin top-left.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(detail::checked_size(w, h), fill) {}

    std::uint8_t& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    std::size_t pixel_count() const { return data.size(); }

    bool operator==(const GrayImage&) const = default;
};

/// Double-precision raster used for filter math; pipeline stages keep values in [0, 1].
struct ImageF {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    ImageF() = default;
    ImageF(int w, int h, double fill = 0.0)
        : width(w), height(h), data(detail::checked_size(w, h), fill) {}

    double& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    double at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    std::size_t pixel_count() const { return data.size(); }

    bool operator==(const ImageF&) const = default;
};

/// Two-class raster. Document convention: foreground (text) = 0, background = 1.
/// Stage masks reuse the container with 1 meaning "pass".
struct BinaryImage {
    static constexpr std::uint8_t kForeground = 0;
    static constexpr std::uint8_t kBackground = 1;

    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    BinaryImage() = default;
    BinaryImage(int w, int h, std::uint8_t fill = kBackground)
        : width(w), height(h), data(detail::checked_size(w, h), fill) {}

    std::uint8_t& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    std::size_t pixel_count() const { return data.size(); }

    bool operator==(const BinaryImage&) const = default;
};

/// 256-bin intensity histogram.
struct Histogram {
    std::array<std::int64_t, 256> bins{};
    std::int64_t total = 0;

    void add(int bin, std::int64_t n = 1) {
        bins[std::size_t(bin)] += n;
        total += n;
    }
    static Histogram of(const GrayImage& img);
};

/// Intensities scaled to [0, 1].
ImageF to_float(const GrayImage& img);

/// Round and clamp scale*value back to 8 bits.
GrayImage quantize8(const ImageF& img, double scale = 255.0);

/// Two-class image as 8-bit gray: foreground -> 0, background -> 255.
GrayImage to_gray(const BinaryImage& img);

/// Classify gray pixels: v < cut -> foreground. For reading ground-truth rasters.
BinaryImage binary_from_gray(const GrayImage& img, std::uint8_t cut = 128);

/// Photometric inversion (255 - v), for light-on-dark documents.
GrayImage invert(const GrayImage& img);

}  // namespace binopt
