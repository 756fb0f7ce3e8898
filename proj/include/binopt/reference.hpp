#pragma once

// Serial reference implementations, written straight from the definitions and
// sharing no code with the production kernels. The test suites use them as
// oracles; the kernel benchmark compares against them.

#include <vector>

#include "binopt/image.hpp"

namespace binopt::reference {

/// O(n * window^2) median with replicate padding.
GrayImage median_filter(const GrayImage& img, int window);

/// O(n * window^2) mean with replicate padding.
ImageF mean_filter(const ImageF& img, int window);

/// Exhaustive minimum-error scan: per candidate split, class moments are
/// recomputed from scratch with the two-pass mean/variance formula.
int kittler_split(const Histogram& hist);

double fmeasure(const BinaryImage& output, const BinaryImage& truth);
double psnr(const BinaryImage& output, const BinaryImage& truth);
double nrm(const BinaryImage& output, const BinaryImage& truth);
double drd(const BinaryImage& output, const BinaryImage& truth);
double mpm(const BinaryImage& output, const BinaryImage& truth);

/// All-pairs nearest-contour search, squared distances.
std::vector<double> contour_sqdist_brute(const BinaryImage& truth);

/// Dense Gaussian-process oracle: kernel matrix inverted explicitly by
/// Gauss-Jordan elimination with partial pivoting. No Eigen, no Cholesky.
struct DensePosterior {
    double mean = 0.0;
    double variance = 0.0;
};
DensePosterior gp_predict_dense(const std::vector<std::vector<double>>& x,
                                const std::vector<double>& y, double theta, double jitter,
                                const std::vector<double>& query);
double gp_lml_dense(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                    double theta, double jitter);

}  // namespace binopt::reference
