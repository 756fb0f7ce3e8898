#pragma once

#include "binopt/image.hpp"

namespace binopt {

/// The six pipeline controls with their admissible ranges.
struct ParamVector {
    double tau1 = 0.1;  // adaptive-median residual threshold, [0.05, 0.2]
    int ws = 45;        // adaptive-median window, odd, [35, 95]
    double tau2 = 0.2;  // low-band mask fraction, [0.05, 0.5]
    int ms = 0;         // mask blur size, [0, 10]
    int ws_h = 301;     // high-band window, odd, [200, 400]
    int ws_l = 101;     // low-band window, odd, [50, 150]

    /// ParameterError naming the offending field.
    void validate() const;

    bool operator==(const ParamVector&) const = default;
};

struct StageOutputs {
    ImageF adaptive;
    ImageF highband;
    BinaryImage lowmask;  // 1 = pass
    ImageF combined;
    BinaryImage final;
};

/// Residual of the image against its windowed median background estimate:
/// max(0, median - pixel) / 255, zeroed where it stays below tau1. Output in [0, 1].
ImageF adaptive_median_stage(const GrayImage& img, double tau1, int ws);

/// max(0, enhanced - mean(enhanced, ws_h)): keeps detail finer than the window.
/// ws_h is clamped to the largest odd window that fits the image.
ImageF bandpass_high(const ImageF& enhanced, int ws_h);

/// Wide-mean mask: 1 where mean(enhanced, ws_l) >= tau2 * max, else 0. An
/// all-zero input yields an all-zero mask. With ms > 0 the mask is blurred
/// with a (2*ceil(ms/2)+1) mean and re-thresholded at half its maximum,
/// mildly dilating the kept region.
BinaryImage bandpass_low_mask(const ImageF& enhanced, int ws_l, double tau2, int ms);

/// Pointwise product: highband where mask = 1, zero elsewhere.
ImageF combine(const ImageF& highband, const BinaryImage& mask);

/// Largest admissible window on a w x h image: min(window, largest odd <= min(w, h)).
int clamp_window(int window, int w, int h);

/// Minimum-error split of a histogram: the index s for which classes
/// [0, s) and [s, 256) minimise
///   J(s) = 1 + 2*(P1*ln(s1) + P2*ln(s2)) - 2*(P1*ln(P1) + P2*ln(P2)).
/// Class standard deviations are floored at 0.5 bin widths so spiky
/// histograms stay finite; ties break toward the lower split.
/// ModelError("degenerate histogram") when no split has mass on both sides.
int kittler_split(const Histogram& hist);

/// Threshold level for a nonnegative image: quantise to 256 bins over
/// [0, max] and return the lower edge of the split bin. Pixels strictly above
/// the level belong to the upper (text) class.
double kittler_threshold(const ImageF& img);

/// Global threshold maximising between-class variance; classes v <= t / v > t,
/// ties toward the lower t.
int otsu_split(const Histogram& hist);

/// Otsu baseline: pixels at or below the global threshold become foreground.
BinaryImage otsu_binarize(const GrayImage& img);

/// Full pipeline: adaptive median stage, high band, low-band mask, combine,
/// minimum-error threshold. Deterministic. A degenerate (constant) combined
/// image yields an all-background page rather than an error.
BinaryImage binarize(const GrayImage& img, const ParamVector& params, StageOutputs* stages = nullptr);

}  // namespace binopt
