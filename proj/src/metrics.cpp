#include "binopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace binopt::metrics {

namespace {

void require_same_dims(const BinaryImage& a, const BinaryImage& b, const char* op) {
    if (a.width != b.width || a.height != b.height)
        throw ParameterError(std::string(op) + ": dimension mismatch");
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Far sentinel for the distance transform: must stay finite so parabola
// intersections never produce inf - inf, yet dwarf any real squared distance.
constexpr double kFar = 1e20;

// One-dimensional squared-distance transform (lower envelope of parabolas).
void dt_1d(const double* f, int n, double* out, int* v, double* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s;
        for (;;) {
            const int p = v[k];
            s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
            if (s <= z[k]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double d = double(q) - v[k];
        out[q] = d * d + f[v[k]];
    }
}

}  // namespace

ConfusionCounts confusion(const BinaryImage& output, const BinaryImage& truth) {
    require_same_dims(output, truth, "confusion");
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    const std::int64_t n = std::int64_t(output.pixel_count());
#pragma omp parallel for reduction(+ : tp, fp, tn, fn) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const bool out_fg = output.data[i] == BinaryImage::kForeground;
        const bool tru_fg = truth.data[i] == BinaryImage::kForeground;
        tp += out_fg && tru_fg;
        fp += out_fg && !tru_fg;
        fn += !out_fg && tru_fg;
        tn += !out_fg && !tru_fg;
    }
    return {tp, fp, tn, fn};
}

double fmeasure(const ConfusionCounts& c) {
    if (c.tp + c.fn == 0) throw MetricError("fmeasure: empty ground truth");
    if (c.tp == 0) return 0.0;
    const double recall = double(c.tp) / double(c.tp + c.fn);
    const double precision = double(c.tp) / double(c.tp + c.fp);
    return 100.0 * 2.0 * recall * precision / (recall + precision);
}

double psnr(const BinaryImage& output, const BinaryImage& truth) {
    const ConfusionCounts c = confusion(output, truth);
    const std::int64_t wrong = c.fp + c.fn;
    if (wrong == 0) return std::numeric_limits<double>::infinity();
    const double mse = double(wrong) / double(c.total());
    return 10.0 * std::log10(1.0 / mse);
}

double nrm(const ConfusionCounts& c) {
    if (c.fn + c.tp == 0) throw MetricError("nrm: ground truth has no foreground");
    if (c.fp + c.tn == 0) throw MetricError("nrm: ground truth has no background");
    const double fn_rate = double(c.fn) / double(c.fn + c.tp);
    const double fp_rate = double(c.fp) / double(c.fp + c.tn);
    return 0.5 * (fn_rate + fp_rate);
}

const std::array<double, 25>& drd_weights() {
    static const std::array<double, 25> w = [] {
        std::array<double, 25> m{};
        double sum = 0.0;
        for (int j = -2; j <= 2; ++j)
            for (int i = -2; i <= 2; ++i) {
                if (i == 0 && j == 0) continue;
                const double v = 1.0 / std::sqrt(double(i * i + j * j));
                m[std::size_t((j + 2) * 5 + (i + 2))] = v;
                sum += v;
            }
        for (double& v : m) v /= sum;
        return m;
    }();
    return w;
}

int nubn(const BinaryImage& truth) {
    int count = 0;
    for (int by = 0; by < truth.height; by += 8) {
        for (int bx = 0; bx < truth.width; bx += 8) {
            const int y1 = std::min(by + 8, truth.height);
            const int x1 = std::min(bx + 8, truth.width);
            const std::uint8_t first = truth.at(bx, by);
            bool uniform = true;
            for (int y = by; y < y1 && uniform; ++y)
                for (int x = bx; x < x1; ++x)
                    if (truth.at(x, y) != first) {
                        uniform = false;
                        break;
                    }
            count += !uniform;
        }
    }
    return count;
}

double drd(const BinaryImage& output, const BinaryImage& truth, int* nubn_out) {
    require_same_dims(output, truth, "drd");
    const int blocks = nubn(truth);
    if (nubn_out) *nubn_out = blocks;

    const auto& w = drd_weights();
    const int width = output.width, height = output.height;
    std::vector<double> row_sum(height, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < height; ++y) {
        double acc = 0.0;
        for (int x = 0; x < width; ++x) {
            const std::uint8_t got = output.at(x, y);
            if (got == truth.at(x, y)) continue;
            // weight mass of ground-truth neighbours disagreeing with the flipped value
            double dk = 0.0;
            for (int j = -2; j <= 2; ++j) {
                const int yy = clampi(y + j, 0, height - 1);
                for (int i = -2; i <= 2; ++i) {
                    const int xx = clampi(x + i, 0, width - 1);
                    if (truth.at(xx, yy) != got) dk += w[std::size_t((j + 2) * 5 + (i + 2))];
                }
            }
            acc += dk;
        }
        row_sum[y] = acc;
    }
    double total = 0.0;
    for (int y = 0; y < height; ++y) total += row_sum[y];  // fixed order, any thread count

    if (blocks == 0) return 0.0;
    return total / blocks;
}

std::vector<double> contour_sqdist(const BinaryImage& truth) {
    const int w = truth.width, h = truth.height;
    std::vector<double> field(std::size_t(w) * h, kFar);

    bool any = false;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (truth.at(x, y) != BinaryImage::kForeground) continue;
            const bool edge =
                (x > 0 && truth.at(x - 1, y) == BinaryImage::kBackground) ||
                (x + 1 < w && truth.at(x + 1, y) == BinaryImage::kBackground) ||
                (y > 0 && truth.at(x, y - 1) == BinaryImage::kBackground) ||
                (y + 1 < h && truth.at(x, y + 1) == BinaryImage::kBackground);
            if (edge) {
                field[std::size_t(y) * w + x] = 0.0;
                any = true;
            }
        }
    if (!any) throw MetricError("no contour: ground truth is single-class");

    // exact two-pass squared EDT: columns, then rows
#pragma omp parallel
    {
        const int side = std::max(w, h);
        std::vector<double> f(side), dcol(side), z(side + 1);
        std::vector<int> v(side);
#pragma omp for schedule(static) nowait
        for (int x = 0; x < w; ++x) {
            for (int y = 0; y < h; ++y) f[y] = field[std::size_t(y) * w + x];
            dt_1d(f.data(), h, dcol.data(), v.data(), z.data());
            for (int y = 0; y < h; ++y) field[std::size_t(y) * w + x] = dcol[y];
        }
#pragma omp barrier
#pragma omp for schedule(static)
        for (int y = 0; y < h; ++y) {
            double* row = field.data() + std::size_t(y) * w;
            std::copy(row, row + w, f.begin());
            dt_1d(f.data(), w, row, v.data(), z.data());
        }
    }
    return field;
}

double mpm(const BinaryImage& output, const BinaryImage& truth) {
    require_same_dims(output, truth, "mpm");
    const std::vector<double> sq = contour_sqdist(truth);

    const int w = output.width, h = output.height;
    std::vector<double> row_d(h, 0.0), row_fn(h, 0.0), row_fp(h, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        double d_acc = 0.0, fn_acc = 0.0, fp_acc = 0.0;
        for (int x = 0; x < w; ++x) {
            const double dist = std::sqrt(sq[std::size_t(y) * w + x]);
            d_acc += dist;
            const bool out_fg = output.at(x, y) == BinaryImage::kForeground;
            const bool tru_fg = truth.at(x, y) == BinaryImage::kForeground;
            if (tru_fg && !out_fg) fn_acc += dist;
            if (!tru_fg && out_fg) fp_acc += dist;
        }
        row_d[y] = d_acc;
        row_fn[y] = fn_acc;
        row_fp[y] = fp_acc;
    }
    double d_total = 0.0, fn_total = 0.0, fp_total = 0.0;
    for (int y = 0; y < h; ++y) {
        d_total += row_d[y];
        fn_total += row_fn[y];
        fp_total += row_fp[y];
    }
    // both classes present implies off-contour pixels exist, so D > 0
    return 0.5 * (fn_total / d_total + fp_total / d_total);
}

std::optional<double> MetricReport::nrm_x100() const {
    if (!nrm) return std::nullopt;
    return *nrm * 100.0;
}

std::optional<double> MetricReport::mpm_x1000() const {
    if (!mpm) return std::nullopt;
    return *mpm * 1000.0;
}

MetricReport evaluate_pair(const BinaryImage& output, const BinaryImage& truth) {
    require_same_dims(output, truth, "evaluate_pair");
    const ConfusionCounts c = confusion(output, truth);

    MetricReport r;
    try {
        r.fmeasure = fmeasure(c);
    } catch (const MetricError&) {
    }
    r.psnr = psnr(output, truth);
    try {
        r.nrm = nrm(c);
    } catch (const MetricError&) {
    }
    int blocks = 0;
    r.drd = drd(output, truth, &blocks);
    r.drd_nubn_zero = blocks == 0;
    try {
        r.mpm = mpm(output, truth);
    } catch (const MetricError&) {
    }
    return r;
}

}  // namespace binopt::metrics
