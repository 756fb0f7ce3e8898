#include "binopt/image.hpp"

#include <cmath>

namespace binopt {

Histogram Histogram::of(const GrayImage& img) {
    Histogram h;
    std::int64_t bins[256] = {0};
    const std::uint8_t* p = img.data.data();
    const std::int64_t n = std::int64_t(img.pixel_count());
#pragma omp parallel for reduction(+ : bins[:256]) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) bins[p[i]]++;
    for (int b = 0; b < 256; ++b) h.bins[b] = bins[b];
    h.total = n;
    return h;
}

ImageF to_float(const GrayImage& img) {
    ImageF out(img.width, img.height);
    const std::int64_t n = std::int64_t(img.pixel_count());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out.data[i] = img.data[i] / 255.0;
    return out;
}

GrayImage quantize8(const ImageF& img, double scale) {
    GrayImage out(img.width, img.height);
    const std::int64_t n = std::int64_t(img.pixel_count());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = std::floor(img.data[i] * scale + 0.5);
        out.data[i] = std::uint8_t(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
    }
    return out;
}

GrayImage to_gray(const BinaryImage& img) {
    GrayImage out(img.width, img.height);
    const std::int64_t n = std::int64_t(img.pixel_count());
    for (std::int64_t i = 0; i < n; ++i)
        out.data[i] = img.data[i] == BinaryImage::kForeground ? 0 : 255;
    return out;
}

BinaryImage binary_from_gray(const GrayImage& img, std::uint8_t cut) {
    BinaryImage out(img.width, img.height);
    const std::int64_t n = std::int64_t(img.pixel_count());
    for (std::int64_t i = 0; i < n; ++i)
        out.data[i] = img.data[i] < cut ? BinaryImage::kForeground : BinaryImage::kBackground;
    return out;
}

GrayImage invert(const GrayImage& img) {
    GrayImage out(img.width, img.height);
    const std::int64_t n = std::int64_t(img.pixel_count());
    for (std::int64_t i = 0; i < n; ++i) out.data[i] = std::uint8_t(255 - img.data[i]);
    return out;
}

}  // namespace binopt
