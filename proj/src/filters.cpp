#include "binopt/filters.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace binopt {

namespace {

void require_odd(int window, const char* op) {
    if (window < 1 || window % 2 == 0)
        throw ParameterError(std::string(op) + ": window must be odd and >= 1, got " +
                             std::to_string(window));
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

template <typename T>
std::vector<T> pad_replicate(const T* src, int w, int h, int r) {
    const int pw = w + 2 * r;
    const int ph = h + 2 * r;
    std::vector<T> pad(std::size_t(pw) * ph);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < ph; ++y) {
        const T* srow = src + std::size_t(clampi(y - r, 0, h - 1)) * w;
        T* prow = pad.data() + std::size_t(y) * pw;
        for (int x = 0; x < r; ++x) prow[x] = srow[0];
        std::memcpy(prow + r, srow, std::size_t(w) * sizeof(T));
        for (int x = w + r; x < pw; ++x) prow[x] = srow[w - 1];
    }
    return pad;
}

inline std::uint8_t hist_select(const std::int32_t* kern, int rank) {
    int cum = 0;
    int v = 0;
    for (;; ++v) {
        cum += kern[v];
        if (cum >= rank) break;
    }
    return std::uint8_t(v);
}

}  // namespace

GrayImage median_filter(const GrayImage& img, int window) {
    require_odd(window, "median_filter");
    if (window == 1) return img;

    const int w = img.width, h = img.height;
    const int r = window / 2;
    const int pw = w + 2 * r;
    const std::vector<std::uint8_t> pad = pad_replicate(img.data.data(), w, h, r);

    GrayImage out(w, h);
    const int rank = (window * window + 1) / 2;  // window odd, so window^2 is odd

    // Horizontal bands per thread. Each band keeps one histogram per padded
    // column covering the vertical extent of the current window, advanced one
    // row at a time; the kernel histogram slides across columns. The result is
    // a fixed function of each pixel's window, so banding cannot change it.
#pragma omp parallel
    {
#ifdef _OPENMP
        const int nb = omp_get_num_threads();
        const int tid = omp_get_thread_num();
#else
        const int nb = 1, tid = 0;
#endif
        const int y0 = int(std::int64_t(h) * tid / nb);
        const int y1 = int(std::int64_t(h) * (tid + 1) / nb);
        if (y0 < y1) {
            std::vector<std::uint16_t> col(std::size_t(pw) * 256, 0);
            for (int y = y0; y < y0 + window; ++y) {
                const std::uint8_t* prow = pad.data() + std::size_t(y) * pw;
                for (int x = 0; x < pw; ++x) col[std::size_t(x) * 256 + prow[x]]++;
            }
            std::vector<std::int32_t> kern(256);
            for (int y = y0; y < y1; ++y) {
                std::fill(kern.begin(), kern.end(), 0);
                for (int x = 0; x < window; ++x) {
                    const std::uint16_t* c = col.data() + std::size_t(x) * 256;
                    for (int v = 0; v < 256; ++v) kern[v] += c[v];
                }
                std::uint8_t* orow = out.data.data() + std::size_t(y) * w;
                orow[0] = hist_select(kern.data(), rank);
                for (int x = 1; x < w; ++x) {
                    const std::uint16_t* sub = col.data() + std::size_t(x - 1) * 256;
                    const std::uint16_t* add = col.data() + std::size_t(x + window - 1) * 256;
                    for (int v = 0; v < 256; ++v) kern[v] += std::int32_t(add[v]) - std::int32_t(sub[v]);
                    orow[x] = hist_select(kern.data(), rank);
                }
                if (y + 1 < y1) {
                    const std::uint8_t* top = pad.data() + std::size_t(y) * pw;
                    const std::uint8_t* bot = pad.data() + std::size_t(y + window) * pw;
                    for (int x = 0; x < pw; ++x) {
                        col[std::size_t(x) * 256 + top[x]]--;
                        col[std::size_t(x) * 256 + bot[x]]++;
                    }
                }
            }
        }
    }
    return out;
}

ImageF mean_filter(const ImageF& img, int window) {
    require_odd(window, "mean_filter");
    if (window == 1) return img;

    const int w = img.width, h = img.height;
    const int r = window / 2;
    const int pw = w + 2 * r;
    const int ph = h + 2 * r;
    const std::vector<double> pad = pad_replicate(img.data.data(), w, h, r);

    // Summed-area table with a zero top row and left column.
    const std::size_t sw = std::size_t(pw) + 1;
    std::vector<double> sat(sw * (std::size_t(ph) + 1), 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < ph; ++y) {
        const double* prow = pad.data() + std::size_t(y) * pw;
        double* srow = sat.data() + std::size_t(y + 1) * sw;
        double run = 0.0;
        for (int x = 0; x < pw; ++x) {
            run += prow[x];
            srow[x + 1] = run;
        }
    }
    for (int y = 1; y <= ph; ++y) {
        double* cur = sat.data() + std::size_t(y) * sw;
        const double* prev = sat.data() + std::size_t(y - 1) * sw;
        for (std::size_t x = 0; x < sw; ++x) cur[x] += prev[x];
    }

    ImageF out(w, h);
    const double inv_area = 1.0 / (double(window) * double(window));
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const double* s0 = sat.data() + std::size_t(y) * sw;           // window top
        const double* s1 = sat.data() + std::size_t(y + window) * sw;  // window bottom
        double* orow = out.data.data() + std::size_t(y) * w;
        for (int x = 0; x < w; ++x) {
            const double sum = s1[x + window] - s1[x] - s0[x + window] + s0[x];
            orow[x] = sum * inv_area;
        }
    }
    return out;
}

}  // namespace binopt
