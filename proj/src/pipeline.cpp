#include "binopt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "binopt/filters.hpp"

namespace binopt {

namespace {

void require_range(double v, double lo, double hi, const char* name) {
    if (!(v >= lo && v <= hi))
        throw ParameterError(std::string(name) + " = " + std::to_string(v) + " outside [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

void require_odd_range(int v, int lo, int hi, const char* name) {
    if (v < lo || v > hi || v % 2 == 0)
        throw ParameterError(std::string(name) + " = " + std::to_string(v) +
                             " must be odd and within [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]");
}

double max_value(const ImageF& img) {
    double mx = img.data[0];
    const std::int64_t n = std::int64_t(img.pixel_count());
#pragma omp parallel for reduction(max : mx) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) mx = std::max(mx, img.data[i]);
    return mx;
}

Histogram quantize_histogram(const ImageF& img, double mx) {
    Histogram h;
    std::int64_t bins[256] = {0};
    const double scale = 256.0 / mx;
    const std::int64_t n = std::int64_t(img.pixel_count());
#pragma omp parallel for reduction(+ : bins[:256]) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = img.data[i];
        int b = v <= 0.0 ? 0 : int(v * scale);
        if (b > 255) b = 255;
        bins[b]++;
    }
    for (int b = 0; b < 256; ++b) h.bins[b] = bins[b];
    h.total = n;
    return h;
}

// Standard deviations inside the criterion are floored at half a bin so that
// single-spike classes keep a finite log.
constexpr double kSigmaMin = 0.5;

}  // namespace

void ParamVector::validate() const {
    require_range(tau1, 0.05, 0.2, "tau1");
    require_odd_range(ws, 35, 95, "ws");
    require_range(tau2, 0.05, 0.5, "tau2");
    if (ms < 0 || ms > 10)
        throw ParameterError("ms = " + std::to_string(ms) + " outside [0, 10]");
    require_odd_range(ws_h, 200, 400, "ws_h");
    require_odd_range(ws_l, 50, 150, "ws_l");
}

int clamp_window(int window, int w, int h) {
    int fit = std::min(w, h);
    if (fit % 2 == 0) --fit;
    return std::min(window, std::max(fit, 1));
}

ImageF adaptive_median_stage(const GrayImage& img, double tau1, int ws) {
    require_range(tau1, 0.05, 0.2, "tau1");
    require_odd_range(ws, 35, 95, "ws");
    const GrayImage background = median_filter(img, ws);
    ImageF out(img.width, img.height);
    const std::int64_t n = std::int64_t(img.pixel_count());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        // text is darker than its local background, so the residual is bright on text
        const int diff = int(background.data[i]) - int(img.data[i]);
        const double r = diff > 0 ? diff / 255.0 : 0.0;
        out.data[i] = r < tau1 ? 0.0 : r;
    }
    return out;
}

ImageF bandpass_high(const ImageF& enhanced, int ws_h) {
    require_odd_range(ws_h, 200, 400, "ws_h");
    const int eff = clamp_window(ws_h, enhanced.width, enhanced.height);
    const ImageF low = mean_filter(enhanced, eff);
    ImageF out(enhanced.width, enhanced.height);
    const std::int64_t n = std::int64_t(enhanced.pixel_count());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = enhanced.data[i] - low.data[i];
        out.data[i] = v > 0.0 ? v : 0.0;
    }
    return out;
}

BinaryImage bandpass_low_mask(const ImageF& enhanced, int ws_l, double tau2, int ms) {
    require_odd_range(ws_l, 50, 150, "ws_l");
    require_range(tau2, 0.05, 0.5, "tau2");
    if (ms < 0 || ms > 10)
        throw ParameterError("ms = " + std::to_string(ms) + " outside [0, 10]");

    const int eff = clamp_window(ws_l, enhanced.width, enhanced.height);
    const ImageF low = mean_filter(enhanced, eff);
    const std::int64_t n = std::int64_t(enhanced.pixel_count());

    BinaryImage mask(enhanced.width, enhanced.height, 0);
    const double mx = max_value(low);
    if (mx <= 0.0) return mask;  // nothing to keep

    const double cut = tau2 * mx;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) mask.data[i] = low.data[i] >= cut ? 1 : 0;

    if (ms > 0) {
        const int blur = 2 * ((ms + 1) / 2) + 1;
        ImageF soft(enhanced.width, enhanced.height);
        for (std::int64_t i = 0; i < n; ++i) soft.data[i] = mask.data[i];
        const ImageF blurred = mean_filter(soft, blur);
        const double bmx = max_value(blurred);
        if (bmx > 0.0) {
            const double bcut = 0.5 * bmx;
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < n; ++i) mask.data[i] = blurred.data[i] >= bcut ? 1 : 0;
        }
    }
    return mask;
}

ImageF combine(const ImageF& highband, const BinaryImage& mask) {
    if (highband.width != mask.width || highband.height != mask.height)
        throw ParameterError("combine: dimension mismatch");
    ImageF out(highband.width, highband.height);
    const std::int64_t n = std::int64_t(highband.pixel_count());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out.data[i] = mask.data[i] ? highband.data[i] : 0.0;
    return out;
}

int kittler_split(const Histogram& hist) {
    const double total = double(hist.total);
    if (total <= 0) throw ModelError("degenerate histogram: empty");

    // prefix mass and first/second moments over bins [0, s)
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double t0 = 0.0, t1 = 0.0, t2 = 0.0;
    for (int b = 0; b < 256; ++b) {
        const double p = hist.bins[b] / total;
        t0 += p;
        t1 += p * b;
        t2 += p * double(b) * double(b);
    }

    int best = -1;
    double best_j = 0.0;
    for (int s = 1; s <= 255; ++s) {
        const int b = s - 1;
        const double p = hist.bins[b] / total;
        c0 += p;
        c1 += p * b;
        c2 += p * double(b) * double(b);

        const double p1 = c0, p2 = t0 - c0;
        if (!(p1 > 0.0) || !(p2 > 0.0)) continue;
        const double mu1 = c1 / p1;
        const double mu2 = (t1 - c1) / p2;
        const double var1 = std::max(c2 / p1 - mu1 * mu1, 0.0);
        const double var2 = std::max((t2 - c2) / p2 - mu2 * mu2, 0.0);
        const double s1 = std::max(std::sqrt(var1), kSigmaMin);
        const double s2 = std::max(std::sqrt(var2), kSigmaMin);

        const double j = 1.0 + 2.0 * (p1 * std::log(s1) + p2 * std::log(s2)) -
                         2.0 * (p1 * std::log(p1) + p2 * std::log(p2));
        if (best < 0 || j < best_j) {
            best = s;
            best_j = j;
        }
    }
    if (best < 0) throw ModelError("degenerate histogram: single populated bin");
    return best;
}

double kittler_threshold(const ImageF& img) {
    const double mx = max_value(img);
    double mn = img.data[0];
    const std::int64_t n = std::int64_t(img.pixel_count());
#pragma omp parallel for reduction(min : mn) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) mn = std::min(mn, img.data[i]);
    if (mn == mx) throw ModelError("degenerate histogram: constant image");

    const Histogram hist = quantize_histogram(img, mx);
    const int s = kittler_split(hist);
    return s * mx / 256.0;
}

int otsu_split(const Histogram& hist) {
    const double total = double(hist.total);
    if (total <= 0) throw ModelError("degenerate histogram: empty");
    double sum = 0.0;
    for (int b = 0; b < 256; ++b) sum += double(b) * hist.bins[b];

    double wb = 0.0, sumb = 0.0;
    int best = 0;
    double best_var = -1.0;
    for (int t = 0; t <= 254; ++t) {
        wb += hist.bins[t];
        if (wb == 0.0) continue;
        const double wf = total - wb;
        if (wf == 0.0) break;
        sumb += double(t) * hist.bins[t];
        const double mb = sumb / wb;
        const double mf = (sum - sumb) / wf;
        const double var = wb * wf * (mb - mf) * (mb - mf);
        if (var > best_var) {
            best_var = var;
            best = t;
        }
    }
    return best;
}

BinaryImage otsu_binarize(const GrayImage& img) {
    const int t = otsu_split(Histogram::of(img));
    BinaryImage out(img.width, img.height);
    const std::int64_t n = std::int64_t(img.pixel_count());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        out.data[i] = img.data[i] <= t ? BinaryImage::kForeground : BinaryImage::kBackground;
    return out;
}

BinaryImage binarize(const GrayImage& img, const ParamVector& params, StageOutputs* stages) {
    params.validate();

    ImageF adaptive = adaptive_median_stage(img, params.tau1, params.ws);
    ImageF highband = bandpass_high(adaptive, params.ws_h);
    BinaryImage lowmask = bandpass_low_mask(adaptive, params.ws_l, params.tau2, params.ms);
    ImageF combined = combine(highband, lowmask);

    BinaryImage out(img.width, img.height, BinaryImage::kBackground);
    try {
        const double level = kittler_threshold(combined);
        const std::int64_t n = std::int64_t(combined.pixel_count());
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i)
            out.data[i] =
                combined.data[i] > level ? BinaryImage::kForeground : BinaryImage::kBackground;
    } catch (const ModelError&) {
        // a constant combined image is a blank page, not a failure
    }

    if (stages) {
        stages->adaptive = std::move(adaptive);
        stages->highband = std::move(highband);
        stages->lowmask = std::move(lowmask);
        stages->combined = std::move(combined);
        stages->final = out;
    }
    return out;
}

}  // namespace binopt
