#include "binopt/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace binopt::reference {

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

void require_odd(int window, const char* op) {
    if (window < 1 || window % 2 == 0)
        throw ParameterError(std::string(op) + ": window must be odd and >= 1");
}

}  // namespace

GrayImage median_filter(const GrayImage& img, int window) {
    require_odd(window, "reference::median_filter");
    const int w = img.width, h = img.height, r = window / 2;
    GrayImage out(w, h);
    std::vector<std::uint8_t> vals;
    vals.reserve(std::size_t(window) * window);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            vals.clear();
            for (int j = -r; j <= r; ++j)
                for (int i = -r; i <= r; ++i)
                    vals.push_back(img.at(clampi(x + i, 0, w - 1), clampi(y + j, 0, h - 1)));
            std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
            out.at(x, y) = vals[vals.size() / 2];
        }
    }
    return out;
}

ImageF mean_filter(const ImageF& img, int window) {
    require_odd(window, "reference::mean_filter");
    const int w = img.width, h = img.height, r = window / 2;
    ImageF out(w, h);
    const double count = double(window) * double(window);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sum = 0.0;
            for (int j = -r; j <= r; ++j)
                for (int i = -r; i <= r; ++i)
                    sum += img.at(clampi(x + i, 0, w - 1), clampi(y + j, 0, h - 1));
            out.at(x, y) = sum / count;
        }
    }
    return out;
}

int kittler_split(const Histogram& hist) {
    const double total = double(hist.total);
    if (total <= 0) throw ModelError("reference::kittler_split: empty histogram");

    int best = -1;
    double best_j = 0.0;
    for (int s = 1; s <= 255; ++s) {
        double p1 = 0.0, p2 = 0.0;
        for (int b = 0; b < s; ++b) p1 += hist.bins[b] / total;
        for (int b = s; b < 256; ++b) p2 += hist.bins[b] / total;
        if (!(p1 > 0.0) || !(p2 > 0.0)) continue;

        double mu1 = 0.0, mu2 = 0.0;
        for (int b = 0; b < s; ++b) mu1 += b * (hist.bins[b] / total);
        for (int b = s; b < 256; ++b) mu2 += b * (hist.bins[b] / total);
        mu1 /= p1;
        mu2 /= p2;

        double var1 = 0.0, var2 = 0.0;
        for (int b = 0; b < s; ++b) var1 += (b - mu1) * (b - mu1) * (hist.bins[b] / total);
        for (int b = s; b < 256; ++b) var2 += (b - mu2) * (b - mu2) * (hist.bins[b] / total);
        var1 /= p1;
        var2 /= p2;

        const double s1 = std::max(std::sqrt(var1), 0.5);
        const double s2 = std::max(std::sqrt(var2), 0.5);
        const double j = 1.0 + 2.0 * (p1 * std::log(s1) + p2 * std::log(s2)) -
                         2.0 * (p1 * std::log(p1) + p2 * std::log(p2));
        if (best < 0 || j < best_j) {
            best = s;
            best_j = j;
        }
    }
    if (best < 0) throw ModelError("reference::kittler_split: single populated bin");
    return best;
}

namespace {

struct Counts {
    double tp = 0, fp = 0, tn = 0, fn = 0;
};

Counts count(const BinaryImage& output, const BinaryImage& truth) {
    if (output.width != truth.width || output.height != truth.height)
        throw ParameterError("reference metric: dimension mismatch");
    Counts c;
    for (int y = 0; y < truth.height; ++y)
        for (int x = 0; x < truth.width; ++x) {
            const bool o = output.at(x, y) == BinaryImage::kForeground;
            const bool t = truth.at(x, y) == BinaryImage::kForeground;
            if (o && t)
                c.tp += 1;
            else if (o && !t)
                c.fp += 1;
            else if (!o && t)
                c.fn += 1;
            else
                c.tn += 1;
        }
    return c;
}

}  // namespace

double fmeasure(const BinaryImage& output, const BinaryImage& truth) {
    const Counts c = count(output, truth);
    if (c.tp + c.fn == 0) throw MetricError("reference::fmeasure: empty ground truth");
    if (c.tp == 0) return 0.0;
    const double recall = c.tp / (c.tp + c.fn);
    const double precision = c.tp / (c.tp + c.fp);
    return 100.0 * 2.0 * recall * precision / (recall + precision);
}

double psnr(const BinaryImage& output, const BinaryImage& truth) {
    const Counts c = count(output, truth);
    const double mse = (c.fp + c.fn) / (c.tp + c.fp + c.tn + c.fn);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double nrm(const BinaryImage& output, const BinaryImage& truth) {
    const Counts c = count(output, truth);
    if (c.fn + c.tp == 0) throw MetricError("reference::nrm: no foreground");
    if (c.fp + c.tn == 0) throw MetricError("reference::nrm: no background");
    return 0.5 * (c.fn / (c.fn + c.tp) + c.fp / (c.fp + c.tn));
}

double drd(const BinaryImage& output, const BinaryImage& truth) {
    if (output.width != truth.width || output.height != truth.height)
        throw ParameterError("reference::drd: dimension mismatch");
    const int w = truth.width, h = truth.height;

    // inverse-distance weights, built in place
    double wm[5][5];
    double wsum = 0.0;
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 5; ++i) {
            const int dy = j - 2, dx = i - 2;
            wm[j][i] = (dx == 0 && dy == 0) ? 0.0 : 1.0 / std::sqrt(double(dx * dx + dy * dy));
            wsum += wm[j][i];
        }
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 5; ++i) wm[j][i] /= wsum;

    int blocks = 0;
    for (int by = 0; by < h; by += 8)
        for (int bx = 0; bx < w; bx += 8) {
            bool seen0 = false, seen1 = false;
            for (int y = by; y < std::min(by + 8, h); ++y)
                for (int x = bx; x < std::min(bx + 8, w); ++x) {
                    if (truth.at(x, y) == BinaryImage::kForeground)
                        seen0 = true;
                    else
                        seen1 = true;
                }
            if (seen0 && seen1) ++blocks;
        }
    if (blocks == 0) return 0.0;

    double total = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (output.at(x, y) == truth.at(x, y)) continue;
            for (int j = -2; j <= 2; ++j)
                for (int i = -2; i <= 2; ++i) {
                    const int xx = clampi(x + i, 0, w - 1);
                    const int yy = clampi(y + j, 0, h - 1);
                    if (truth.at(xx, yy) != output.at(x, y)) total += wm[j + 2][i + 2];
                }
        }
    return total / blocks;
}

std::vector<double> contour_sqdist_brute(const BinaryImage& truth) {
    const int w = truth.width, h = truth.height;
    std::vector<std::pair<int, int>> contour;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (truth.at(x, y) != BinaryImage::kForeground) continue;
            const bool edge = (x > 0 && truth.at(x - 1, y) == BinaryImage::kBackground) ||
                              (x + 1 < w && truth.at(x + 1, y) == BinaryImage::kBackground) ||
                              (y > 0 && truth.at(x, y - 1) == BinaryImage::kBackground) ||
                              (y + 1 < h && truth.at(x, y + 1) == BinaryImage::kBackground);
            if (edge) contour.emplace_back(x, y);
        }
    if (contour.empty()) throw MetricError("reference: no contour");

    std::vector<double> field(std::size_t(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            for (const auto& [cx, cy] : contour) {
                const std::int64_t dx = x - cx, dy = y - cy;
                best = std::min(best, dx * dx + dy * dy);
            }
            field[std::size_t(y) * w + x] = double(best);
        }
    return field;
}

double mpm(const BinaryImage& output, const BinaryImage& truth) {
    if (output.width != truth.width || output.height != truth.height)
        throw ParameterError("reference::mpm: dimension mismatch");
    const std::vector<double> sq = contour_sqdist_brute(truth);
    const int w = truth.width, h = truth.height;

    double d_total = 0.0, fn_sum = 0.0, fp_sum = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double d = std::sqrt(sq[std::size_t(y) * w + x]);
            d_total += d;
            const bool o = output.at(x, y) == BinaryImage::kForeground;
            const bool t = truth.at(x, y) == BinaryImage::kForeground;
            if (t && !o) fn_sum += d;
            if (!t && o) fp_sum += d;
        }
    return 0.5 * (fn_sum / d_total + fp_sum / d_total);
}

namespace {

// Gauss-Jordan inverse with partial pivoting.
std::vector<std::vector<double>> invert_matrix(std::vector<std::vector<double>> a) {
    const int n = int(a.size());
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) inv[i][i] = 1.0;

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (a[pivot][col] == 0.0) throw ModelError("reference: singular matrix");
        std::swap(a[col], a[pivot]);
        std::swap(inv[col], inv[pivot]);

        const double scale = 1.0 / a[col][col];
        for (int c = 0; c < n; ++c) {
            a[col][c] *= scale;
            inv[col][c] *= scale;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (int c = 0; c < n; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return inv;
}

double kernel(const std::vector<double>& a, const std::vector<double>& b, double theta) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
    return std::exp(-sq / (2.0 * theta * theta));
}

// Solve M x = b through the explicit inverse, then polish with two rounds of
// iterative refinement; the raw inverse alone loses digits when the kernel
// matrix is nearly singular.
std::vector<double> solve_via_inverse(const std::vector<std::vector<double>>& m,
                                      const std::vector<std::vector<double>>& inv,
                                      const std::vector<double>& b) {
    const int n = int(b.size());
    std::vector<double> x(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) x[i] += inv[i][j] * b[j];
    for (int round = 0; round < 2; ++round) {
        std::vector<double> r = b;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r[i] -= m[i][j] * x[j];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) x[i] += inv[i][j] * r[j];
    }
    return x;
}

std::vector<std::vector<double>> kernel_matrix(const std::vector<std::vector<double>>& x,
                                               double theta, double jitter) {
    const int n = int(x.size());
    std::vector<std::vector<double>> k(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) k[i][j] = kernel(x[i], x[j], theta) + (i == j ? jitter : 0.0);
    return k;
}

}  // namespace

DensePosterior gp_predict_dense(const std::vector<std::vector<double>>& x,
                                const std::vector<double>& y, double theta, double jitter,
                                const std::vector<double>& query) {
    const int n = int(x.size());
    double mean_y = 0.0;
    for (double v : y) mean_y += v;
    mean_y /= n;

    const auto m = kernel_matrix(x, theta, jitter);
    const auto inv = invert_matrix(m);
    std::vector<double> kv(n), yc(n);
    for (int i = 0; i < n; ++i) {
        kv[i] = kernel(query, x[i], theta);
        yc[i] = y[i] - mean_y;
    }

    // mean = ybar + k' K^-1 (y - ybar), variance = 1 - k' K^-1 k
    const std::vector<double> alpha = solve_via_inverse(m, inv, yc);
    const std::vector<double> kk = solve_via_inverse(m, inv, kv);
    double mean = mean_y;
    double quad = 0.0;
    for (int i = 0; i < n; ++i) {
        mean += kv[i] * alpha[i];
        quad += kv[i] * kk[i];
    }
    return {mean, std::max(1.0 - quad, 0.0)};
}

double gp_lml_dense(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                    double theta, double jitter) {
    const int n = int(x.size());
    double mean_y = 0.0;
    for (double v : y) mean_y += v;
    mean_y /= n;

    const auto k = kernel_matrix(x, theta, jitter);
    const auto inv = invert_matrix(k);

    // log-determinant via LU-free Gaussian elimination on a copy
    std::vector<std::vector<double>> a = k;
    double logdet = 0.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (pivot != col) std::swap(a[col], a[pivot]);  // symmetric PD: pivot sign stays positive
        logdet += std::log(std::abs(a[col][col]));
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
        }
    }

    std::vector<double> yc(n);
    for (int i = 0; i < n; ++i) yc[i] = y[i] - mean_y;
    const std::vector<double> alpha = solve_via_inverse(k, inv, yc);
    double quad = 0.0;
    for (int i = 0; i < n; ++i) quad += yc[i] * alpha[i];

    return -0.5 * quad - 0.5 * logdet - 0.5 * n * std::log(2.0 * 3.14159265358979323846);
}

}  // namespace binopt::reference
