// Times the OpenMP kernels against the serial reference implementations and
// checks that both sides agree while at it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "binopt/bayesopt.hpp"
#include "binopt/filters.hpp"
#include "binopt/metrics.hpp"
#include "binopt/pipeline.hpp"
#include "binopt/reference.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace binopt;

template <typename F>
double time_best_ms(F&& fn, int reps) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

GrayImage random_gray(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    GrayImage img(w, h);
    for (auto& v : img.data) v = std::uint8_t(rng() % 256);
    return img;
}

BinaryImage random_binary(int w, int h, std::uint64_t seed, double fg_fraction) {
    std::mt19937_64 rng(seed);
    BinaryImage img(w, h);
    for (auto& v : img.data)
        v = bo::uniform01(rng) < fg_fraction ? BinaryImage::kForeground : BinaryImage::kBackground;
    return img;
}

void row(const char* name, const char* size, double par_ms, double ref_ms, bool agree) {
    if (ref_ms >= 0.0)
        std::printf("%-22s %-10s %10.2f %12.2f %8.1fx %8s\n", name, size, par_ms, ref_ms,
                    ref_ms / par_ms, agree ? "yes" : "NO");
    else
        std::printf("%-22s %-10s %10.2f %12s %9s %8s\n", name, size, par_ms, "-", "-", "-");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (OpenMP off)\n");
#endif
    std::printf("%-22s %-10s %10s %12s %9s %8s\n", "kernel", "size", "omp ms", "serial ms",
                "speedup", "agree");

    {
        const GrayImage img = random_gray(256, 256, 11);
        GrayImage a, b;
        const double par = time_best_ms([&] { a = median_filter(img, 35); }, 3);
        const double ref = time_best_ms([&] { b = reference::median_filter(img, 35); }, 1);
        row("median w=35", "256x256", par, ref, a == b);
    }
    {
        const GrayImage img = random_gray(1024, 1024, 12);
        GrayImage a;
        const double par = time_best_ms([&] { a = median_filter(img, 95); }, 3);
        row("median w=95", "1024x1024", par, -1.0, true);
    }
    {
        const ImageF img = to_float(random_gray(256, 256, 13));
        ImageF a, b;
        const double par = time_best_ms([&] { a = mean_filter(img, 51); }, 3);
        const double ref = time_best_ms([&] { b = reference::mean_filter(img, 51); }, 1);
        bool agree = a.width == b.width;
        for (std::size_t i = 0; agree && i < a.data.size(); ++i)
            agree = std::abs(a.data[i] - b.data[i]) <= 1e-9;
        row("mean w=51", "256x256", par, ref, agree);
    }
    {
        const BinaryImage out = random_binary(256, 256, 14, 0.4);
        const BinaryImage truth = random_binary(256, 256, 15, 0.4);
        double a = 0, b = 0;
        const double par = time_best_ms([&] { a = metrics::drd(out, truth); }, 3);
        const double ref = time_best_ms([&] { b = reference::drd(out, truth); }, 1);
        row("drd", "256x256", par, ref, std::abs(a - b) <= 1e-9);
    }
    {
        const BinaryImage out = random_binary(96, 96, 16, 0.3);
        const BinaryImage truth = random_binary(96, 96, 17, 0.3);
        double a = 0, b = 0;
        const double par = time_best_ms([&] { a = metrics::mpm(out, truth); }, 3);
        const double ref = time_best_ms([&] { b = reference::mpm(out, truth); }, 1);
        row("mpm (exact EDT)", "96x96", par, ref, std::abs(a - b) <= 1e-12);
    }
    {
        const GrayImage img = random_gray(480, 360, 18);
        ParamVector p;
        p.tau1 = 0.1;
        p.ws = 45;
        p.tau2 = 0.2;
        p.ms = 2;
        p.ws_h = 301;
        p.ws_l = 101;
        BinaryImage a;
        const double par = time_best_ms([&] { a = binarize(img, p); }, 3);
        row("binarize pipeline", "480x360", par, -1.0, true);
    }
    return 0;
}
