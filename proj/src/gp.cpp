#include "binopt/gp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "binopt/error.hpp"

namespace binopt::gp {

double se_kernel(std::span<const double> a, std::span<const double> b, double theta) {
    if (theta <= 0.0) throw ParameterError("se_kernel: theta must be positive");
    if (a.size() != b.size()) throw ParameterError("se_kernel: dimension mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sq += d * d;
    }
    return std::exp(-sq / (2.0 * theta * theta));
}

namespace {

void check_unit_cube(std::span<const double> x, const char* what) {
    for (double v : x)
        if (!(v >= 0.0 && v <= 1.0))
            throw ParameterError(std::string(what) + ": coordinate " + std::to_string(v) +
                                 " outside the unit cube");
}

}  // namespace

GpModel GpModel::fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                     double theta, double jitter) {
    if (x.empty()) throw ParameterError("GpModel::fit: need at least one training point");
    if (x.size() != y.size()) throw ParameterError("GpModel::fit: |X| != |y|");
    if (theta <= 0.0) throw ParameterError("GpModel::fit: theta must be positive");
    if (jitter < 0.0) throw ParameterError("GpModel::fit: jitter must be nonnegative");

    const int n = int(x.size());
    const int d = int(x[0].size());
    GpModel m;
    m.x_.resize(n, d);
    for (int i = 0; i < n; ++i) {
        if (int(x[i].size()) != d) throw ParameterError("GpModel::fit: ragged input rows");
        check_unit_cube(x[i], "GpModel::fit");
        for (int j = 0; j < d; ++j) m.x_(i, j) = x[i][j];
    }

    Eigen::VectorXd yv(n);
    for (int i = 0; i < n; ++i) yv(i) = y[i];
    m.y_mean_ = yv.mean();
    m.y_centered_ = yv.array() - m.y_mean_;
    m.theta_ = theta;

    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
        k(i, i) = 1.0;  // SE kernel has unit diagonal
        for (int j = i + 1; j < n; ++j) {
            const double v = se_kernel(std::span(x[i]), std::span(x[j]), theta);
            k(i, j) = v;
            k(j, i) = v;
        }
    }

    // Escalate the regulariser tenfold until the factorisation goes through.
    double jit = jitter > 0.0 ? jitter : 1e-8;
    for (;; jit *= 10.0) {
        Eigen::LLT<Eigen::MatrixXd> llt(k + jit * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() == Eigen::Success) {
            m.jitter_ = jit;
            m.chol_ = llt.matrixL();
            m.alpha_ = llt.solve(m.y_centered_);
            return m;
        }
        if (jit > 1e-2)
            throw ModelError("GpModel::fit: kernel matrix not factorizable at jitter <= 1e-2 "
                             "(conflicting duplicate inputs?)");
    }
}

Posterior GpModel::predict(std::span<const double> x) const {
    if (int(x.size()) != dim()) throw ParameterError("GpModel::predict: dimension mismatch");
    check_unit_cube(x, "GpModel::predict");

    const int n = size();
    Eigen::VectorXd kv(n);
    for (int i = 0; i < n; ++i) {
        double sq = 0.0;
        for (int j = 0; j < dim(); ++j) {
            const double d = x[std::size_t(j)] - x_(i, j);
            sq += d * d;
        }
        kv(i) = std::exp(-sq / (2.0 * theta_ * theta_));
    }

    Posterior p;
    p.mean = y_mean_ + kv.dot(alpha_);
    const Eigen::VectorXd v =
        chol_.triangularView<Eigen::Lower>().solve(kv);
    p.variance = std::max(1.0 - v.squaredNorm(), 0.0);
    return p;
}

double GpModel::log_marginal_likelihood() const {
    const int n = size();
    double logdet_half = 0.0;
    for (int i = 0; i < n; ++i) logdet_half += std::log(chol_(i, i));
    return -0.5 * y_centered_.dot(alpha_) - logdet_half -
           0.5 * n * std::log(2.0 * std::numbers::pi);
}

GpModel fit_best_theta(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                       double jitter) {
    GpModel best = GpModel::fit(x, y, kThetaGrid[0], jitter);
    double best_lml = best.log_marginal_likelihood();
    for (std::size_t i = 1; i < kThetaGrid.size(); ++i) {
        GpModel m = GpModel::fit(x, y, kThetaGrid[i], jitter);
        const double lml = m.log_marginal_likelihood();
        if (lml > best_lml) {
            best = std::move(m);
            best_lml = lml;
        }
    }
    return best;
}

}  // namespace binopt::gp
