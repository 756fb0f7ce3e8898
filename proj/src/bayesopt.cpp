#include "binopt/bayesopt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "binopt/metrics.hpp"

namespace binopt::bo {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double uniform01(std::mt19937_64& g) { return double(g() >> 11) * 0x1.0p-53; }

double normal01(std::mt19937_64& g) {
    double u1 = uniform01(g);
    const double u2 = uniform01(g);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SearchSpace SearchSpace::standard() {
    SearchSpace s;
    s.dims = {
        {"tau1", 0.05, 0.2, DimKind::Continuous},
        {"ws", 35, 95, DimKind::OddInteger},
        {"tau2", 0.05, 0.5, DimKind::Continuous},
        {"ms", 0, 10, DimKind::Integer},
        {"ws_h", 200, 400, DimKind::OddInteger},
        {"ws_l", 50, 150, DimKind::OddInteger},
    };
    return s;
}

namespace {

double decode_dim(double u, const Dim& dim) {
    u = std::clamp(u, 0.0, 1.0);
    const double v = dim.lower + u * (dim.upper - dim.lower);
    switch (dim.kind) {
        case DimKind::Continuous:
            return v;
        case DimKind::Integer: {
            const double r = std::floor(v + 0.5);
            return std::clamp(r, std::ceil(dim.lower), std::floor(dim.upper));
        }
        case DimKind::OddInteger: {
            // nearest odd integer, even affine values rounding up
            double o = 2.0 * std::floor(v / 2.0) + 1.0;
            double lo = std::ceil(dim.lower);
            if (std::fmod(lo, 2.0) == 0.0) lo += 1.0;
            double hi = std::floor(dim.upper);
            if (std::fmod(hi, 2.0) == 0.0) hi -= 1.0;
            return std::clamp(o, lo, hi);
        }
    }
    return v;
}

}  // namespace

DecodedPoint decode(std::span<const double> unit, const SearchSpace& space) {
    if (int(unit.size()) != space.dim()) throw ParameterError("decode: dimension mismatch");
    DecodedPoint out(unit.size());
    for (std::size_t i = 0; i < unit.size(); ++i) out[i] = decode_dim(unit[i], space.dims[i]);
    return out;
}

std::vector<double> encode(const DecodedPoint& values, const SearchSpace& space) {
    if (int(values.size()) != space.dim()) throw ParameterError("encode: dimension mismatch");
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Dim& d = space.dims[i];
        out[i] = std::clamp((values[i] - d.lower) / (d.upper - d.lower), 0.0, 1.0);
    }
    return out;
}

ParamVector to_params(const DecodedPoint& values) {
    if (values.size() != 6) throw ParameterError("to_params: expected six decoded values");
    ParamVector p;
    p.tau1 = values[0];
    p.ws = int(values[1]);
    p.tau2 = values[2];
    p.ms = int(values[3]);
    p.ws_h = int(values[4]);
    p.ws_l = int(values[5]);
    return p;
}

Objective fmeasure_objective(const GrayImage& image, const BinaryImage& truth) {
    Objective obj;
    obj.name = "fmeasure";
    obj.fn = [&image, &truth](const DecodedPoint& values) {
        const BinaryImage out = binarize(image, to_params(values));
        return metrics::fmeasure(metrics::confusion(out, truth));
    };
    return obj;
}

std::vector<std::vector<double>> latin_hypercube(int n, int d, std::mt19937_64& rng) {
    if (n < 1 || d < 1) throw ParameterError("latin_hypercube: n and d must be >= 1");
    std::vector<std::vector<double>> pts(n, std::vector<double>(d));
    std::vector<int> perm(n);
    for (int dim = 0; dim < d; ++dim) {
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int i = n - 1; i > 0; --i) {
            const int j = int(rng() % std::uint64_t(i + 1));
            std::swap(perm[i], perm[j]);
        }
        for (int i = 0; i < n; ++i) pts[i][dim] = (perm[i] + uniform01(rng)) / n;
    }
    return pts;
}

std::vector<std::vector<double>> latin_hypercube(int n, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return latin_hypercube(n, d, rng);
}

double ucb(const gp::Posterior& p, double beta) {
    if (beta < 0.0) throw ParameterError("ucb: beta must be nonnegative");
    return p.mean + beta * std::sqrt(std::max(p.variance, 0.0));
}

std::vector<double> propose_next(const gp::GpModel& model, const SearchSpace& space, double beta,
                                 int n_candidates, std::mt19937_64& rng,
                                 const std::vector<double>* incumbent) {
    if (n_candidates < 1) throw ParameterError("propose_next: need at least one candidate");
    const int d = space.dim();

    std::vector<std::vector<double>> cands;
    cands.reserve(std::size_t(n_candidates) + (incumbent ? kIncumbentPerturbations : 0));
    for (int i = 0; i < n_candidates; ++i) {
        std::vector<double> c(d);
        for (int j = 0; j < d; ++j) c[j] = uniform01(rng);
        cands.push_back(std::move(c));
    }
    if (incumbent) {
        for (int i = 0; i < kIncumbentPerturbations; ++i) {
            std::vector<double> c(d);
            for (int j = 0; j < d; ++j)
                c[j] = std::clamp((*incumbent)[j] + kPerturbationSigma * normal01(rng), 0.0, 1.0);
            cands.push_back(std::move(c));
        }
    }

    std::vector<double> score(cands.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < std::int64_t(cands.size()); ++i)
        score[i] = ucb(model.predict(cands[i]), beta);

    std::size_t best = 0;
    for (std::size_t i = 1; i < cands.size(); ++i)
        if (score[i] > score[best]) best = i;  // ties keep the earliest
    return cands[best];
}

std::vector<double> OptimizationTrace::best_so_far() const {
    std::vector<double> out(iterations.size());
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < iterations.size(); ++i) {
        best = std::max(best, iterations[i].observed);
        out[i] = best;
    }
    return out;
}

namespace {

bool near_duplicate(const std::vector<std::vector<double>>& xs, const std::vector<double>& u) {
    for (const auto& x : xs) {
        double linf = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) linf = std::max(linf, std::abs(x[j] - u[j]));
        if (linf <= 1e-9) return true;
    }
    return false;
}

double eval_or_zero(const Objective& objective, const DecodedPoint& p, bool* failed) {
    try {
        const double v = objective.fn(p);
        if (std::isnan(v)) throw ModelError("objective returned NaN");
        return v;
    } catch (const std::exception&) {
        *failed = true;
        return 0.0;  // worst case for a [0, 100] score
    }
}

}  // namespace

OptimizeResult optimize(const Objective& objective, const SearchSpace& space, Budget budget,
                        double beta, std::uint64_t seed, int n_candidates) {
    if (budget.n_init < 2) throw ParameterError("optimize: n_init must be >= 2");
    if (budget.n_iter < 0) throw ParameterError("optimize: n_iter must be >= 0");
    if (!objective.fn) throw ParameterError("optimize: empty objective");
    const int d = space.dim();
    if (d < 1) throw ParameterError("optimize: empty search space");

    std::mt19937_64 design_rng(mix_seed(seed, kDesignStream));
    std::mt19937_64 cand_rng(mix_seed(seed, kCandidateStream));

    OptimizeResult res;
    res.trace.budget = budget;
    auto& recs = res.trace.iterations;
    recs.reserve(std::size_t(budget.n_init) + budget.n_iter);

    std::vector<std::vector<double>> xs = latin_hypercube(budget.n_init, d, design_rng);
    std::vector<double> ys(budget.n_init, 0.0);
    std::vector<DecodedPoint> decoded(budget.n_init);
    std::vector<unsigned char> failed(budget.n_init, 0);

    // evaluations of the initial design are independent and may run in parallel
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < budget.n_init; ++i) {
        decoded[i] = decode(xs[i], space);
        bool f = false;
        ys[i] = eval_or_zero(objective, decoded[i], &f);
        failed[i] = f ? 1 : 0;
    }
    if (std::all_of(failed.begin(), failed.end(), [](unsigned char f) { return f == 1; }))
        throw ModelError("optimize: every initial-design evaluation failed");

    for (int i = 0; i < budget.n_init; ++i)
        recs.push_back({xs[i], decoded[i], ys[i], std::nullopt});

    auto best_index = [&recs]() {
        std::size_t best = 0;
        for (std::size_t i = 1; i < recs.size(); ++i)
            if (recs[i].observed > recs[best].observed) best = i;
        return best;
    };

    for (int it = 0; it < budget.n_iter; ++it) {
        // The kernel has unit prior variance, so the observations are
        // standardized before fitting; otherwise the exploration term's weight
        // would depend on the objective's scale. Predictions map back below.
        double y_mean = 0.0;
        for (double v : ys) y_mean += v;
        y_mean /= double(ys.size());
        double y_var = 0.0;
        for (double v : ys) y_var += (v - y_mean) * (v - y_mean);
        const double y_scale = std::sqrt(y_var / double(ys.size()));
        const double s = y_scale > 1e-12 ? y_scale : 1.0;
        std::vector<double> ys_std(ys.size());
        for (std::size_t i = 0; i < ys.size(); ++i) ys_std[i] = (ys[i] - y_mean) / s;

        const gp::GpModel model = gp::fit_best_theta(xs, ys_std);
        const std::size_t inc = best_index();
        std::vector<double> u =
            propose_next(model, space, beta, n_candidates, cand_rng, &recs[inc].unit);
        while (near_duplicate(xs, u)) {
            // a repeat sample adds no information and degenerates the kernel
            for (double& v : u) v = uniform01(cand_rng);
        }
        const double predicted = y_mean + s * model.predict(u).mean;
        DecodedPoint p = decode(u, space);
        bool f = false;
        const double y = eval_or_zero(objective, p, &f);
        xs.push_back(u);
        ys.push_back(y);
        recs.push_back({std::move(u), std::move(p), y, predicted});
    }

    const std::size_t best = best_index();
    res.trace.best_index = int(best);
    res.best = recs[best].decoded;
    res.best_observed = recs[best].observed;
    return res;
}

void write_trace_csv(std::ostream& os, const OptimizationTrace& trace, const SearchSpace& space) {
    os << "iteration";
    for (const Dim& d : space.dims) os << "," << d.name;
    os << ",observed,predicted\n";
    char buf[64];
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        const IterationRecord& r = trace.iterations[i];
        os << (i + 1);
        for (double v : r.decoded) {
            std::snprintf(buf, sizeof buf, "%.10g", v);
            os << "," << buf;
        }
        std::snprintf(buf, sizeof buf, "%.10g", r.observed);
        os << "," << buf << ",";
        if (r.predicted) {
            std::snprintf(buf, sizeof buf, "%.10g", *r.predicted);
            os << buf;
        }
        os << "\n";
    }
}

}  // namespace binopt::bo
