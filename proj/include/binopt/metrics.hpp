#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "binopt/image.hpp"

namespace binopt::metrics {

/// Pixel tallies with positive = foreground (text).
struct ConfusionCounts {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::int64_t total() const { return tp + fp + tn + fn; }
};

ConfusionCounts confusion(const BinaryImage& output, const BinaryImage& truth);

/// Harmonic mean of pixel recall and precision, in percent. 0 when no text
/// was recovered; MetricError when the ground truth holds no text at all.
double fmeasure(const ConfusionCounts& c);

/// 10*log10(1/MSE) for two-class images (C = 1); +infinity on a perfect match.
double psnr(const BinaryImage& output, const BinaryImage& truth);

/// Mean of the false-negative and false-positive rates, in [0, 1].
double nrm(const ConfusionCounts& c);

/// 5x5 inverse-distance weights, centre zero, normalised to unit sum. Row-major.
const std::array<double, 25>& drd_weights();

/// Non-uniform 8x8 blocks of the ground truth; partial blocks at the right and
/// bottom edges count, judged on their actual pixels.
int nubn(const BinaryImage& truth);

/// Distance reciprocal distortion: per flipped pixel, the weight mass of the
/// 5x5 ground-truth neighbours (replicate-padded) that disagree with the
/// flipped value, summed and divided by nubn. nubn_out, when given, receives
/// the block count; a ground truth with no non-uniform block yields 0.
double drd(const BinaryImage& output, const BinaryImage& truth, int* nubn_out = nullptr);

/// Exact squared Euclidean distances to the ground-truth text contour
/// (foreground pixels 4-adjacent to background), row-major over the image.
/// MetricError("no contour") when the truth is single-class.
std::vector<double> contour_sqdist(const BinaryImage& truth);

/// Misclassification penalty: contour distances of the wrong pixels, split by
/// error type, each normalised by the total distance mass D over the whole
/// image, then averaged.
double mpm(const BinaryImage& output, const BinaryImage& truth);

struct MetricReport {
    std::optional<double> fmeasure;
    std::optional<double> psnr;
    std::optional<double> drd;
    std::optional<double> nrm;
    std::optional<double> mpm;
    bool drd_nubn_zero = false;

    /// Paper-style scaled views.
    std::optional<double> nrm_x100() const;
    std::optional<double> mpm_x1000() const;
};

/// All five measures. A metric undefined for the pair is left empty instead of
/// failing the whole report.
MetricReport evaluate_pair(const BinaryImage& output, const BinaryImage& truth);

}  // namespace binopt::metrics
