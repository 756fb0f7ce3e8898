#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <vector>

namespace binopt::gp {

/// Squared-exponential covariance exp(-||a-b||^2 / (2 theta^2)).
double se_kernel(std::span<const double> a, std::span<const double> b, double theta);

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;  // clamped at 0 after floating-point cancellation
};

/// Gaussian-process interpolant over the unit hypercube with an SE kernel.
/// Targets are centred on their mean; the kernel matrix gets a diagonal
/// jitter and is Cholesky-factorised. If factorisation fails the jitter
/// escalates tenfold up to 1e-2 before giving up with a ModelError.
class GpModel {
public:
    static GpModel fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                       double theta, double jitter = 1e-8);

    Posterior predict(std::span<const double> x) const;

    /// -1/2 y'alpha - sum(ln L_ii) - n/2 ln(2 pi), with y the centred targets.
    double log_marginal_likelihood() const;

    int size() const { return int(x_.rows()); }
    int dim() const { return int(x_.cols()); }
    double theta() const { return theta_; }
    /// Effective jitter after any escalation.
    double jitter() const { return jitter_; }
    double target_mean() const { return y_mean_; }

private:
    GpModel() = default;

    Eigen::MatrixXd x_;          // n x d training inputs
    Eigen::VectorXd y_centered_;
    double y_mean_ = 0.0;
    double theta_ = 1.0;
    double jitter_ = 0.0;
    Eigen::MatrixXd chol_;       // lower-triangular factor of K + jitter*I
    Eigen::VectorXd alpha_;      // (K + jitter*I)^-1 y_centered
};

inline constexpr std::array<double, 6> kThetaGrid{0.05, 0.1, 0.2, 0.4, 0.8, 1.6};

/// Refit over kThetaGrid and keep the width with the highest marginal
/// likelihood (first grid entry wins ties).
GpModel fit_best_theta(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                       double jitter = 1e-8);

}  // namespace binopt::gp
