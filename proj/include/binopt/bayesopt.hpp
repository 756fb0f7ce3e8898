#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "binopt/gp.hpp"
#include "binopt/pipeline.hpp"

namespace binopt::bo {

// ---- deterministic randomness ----------------------------------------------
// All randomness flows from one user seed. Substreams are derived with a
// splitmix64 mix so the initial design and the candidate search consume
// independent streams, and doubles come straight from generator bits so a
// replay does not depend on standard-library distribution internals.

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t fnv1a(std::string_view s);

/// Uniform double in [0, 1) from the top 53 bits of the generator output.
double uniform01(std::mt19937_64& g);

/// Standard normal via Box-Muller; consumes exactly two uniforms per call.
double normal01(std::mt19937_64& g);

inline constexpr std::uint64_t kDesignStream = 1;
inline constexpr std::uint64_t kCandidateStream = 2;

// ---- search space ------------------------------------------------------------

enum class DimKind { Continuous, Integer, OddInteger };

struct Dim {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    DimKind kind = DimKind::Continuous;
};

struct SearchSpace {
    std::vector<Dim> dims;
    int dim() const { return int(dims.size()); }

    /// The six-parameter document space: tau1, ws, tau2, ms, ws_h, ws_l.
    static SearchSpace standard();
};

/// Decoded parameter values, one per dimension of the space.
using DecodedPoint = std::vector<double>;

/// Map a unit-cube point to parameter values: affine for continuous dims,
/// nearest integer for integer dims, nearest odd integer (clamped inside the
/// bounds) for odd-integer dims. Inputs are clamped to [0, 1] first.
DecodedPoint decode(std::span<const double> unit, const SearchSpace& space);

/// Inverse affine map of decoded values, clamped to [0, 1].
std::vector<double> encode(const DecodedPoint& values, const SearchSpace& space);

/// Interpret a decoded point from the standard space as a ParamVector.
ParamVector to_params(const DecodedPoint& values);

struct Objective {
    std::function<double(const DecodedPoint&)> fn;
    std::string name = "objective";
};

/// F-measure of binarize(image, params) against the ground truth, for the
/// standard space. Higher is better.
Objective fmeasure_objective(const GrayImage& image, const BinaryImage& truth);

// ---- sampling ------------------------------------------------------------------

/// n stratified points in [0, 1)^d: along every dimension, each of the n
/// equal bins holds exactly one sample. Streams: per dimension, one
/// Fisher-Yates shuffle followed by n in-bin offsets.
std::vector<std::vector<double>> latin_hypercube(int n, int d, std::mt19937_64& rng);
std::vector<std::vector<double>> latin_hypercube(int n, int d, std::uint64_t seed);

/// Upper confidence bound mu + beta * sqrt(variance).
double ucb(const gp::Posterior& p, double beta);

inline constexpr int kIncumbentPerturbations = 50;
inline constexpr double kPerturbationSigma = 0.05;

/// Argmax of the UCB score over n_candidates uniform cube points plus, when
/// an incumbent is given, kIncumbentPerturbations Gaussian perturbations of it
/// (sigma kPerturbationSigma, clamped to the cube). Candidates are drawn from
/// rng in exactly that order, coordinates innermost; ties keep the earliest
/// candidate.
std::vector<double> propose_next(const gp::GpModel& model, const SearchSpace& space, double beta,
                                 int n_candidates, std::mt19937_64& rng,
                                 const std::vector<double>* incumbent = nullptr);

// ---- the loop ------------------------------------------------------------------

struct Budget {
    int n_init = 10;
    int n_iter = 30;
};

struct IterationRecord {
    std::vector<double> unit;
    DecodedPoint decoded;
    double observed = 0.0;
    /// Model mean at selection time; empty for the initial design.
    std::optional<double> predicted;
};

struct OptimizationTrace {
    std::vector<IterationRecord> iterations;
    Budget budget;
    int best_index = -1;

    std::vector<double> best_so_far() const;
};

struct OptimizeResult {
    DecodedPoint best;
    double best_observed = 0.0;
    OptimizationTrace trace;
};

/// Latin-hypercube initial design, then n_iter rounds of refit (theta grid),
/// UCB proposal, decode, evaluate. A proposal within 1e-9 (max norm, unit
/// cube) of an already evaluated point is replaced by a fresh uniform point.
/// A failing objective evaluation scores 0 and the loop continues; only a
/// fully failed initial design aborts. Total evaluations are exactly
/// n_init + n_iter.
OptimizeResult optimize(const Objective& objective, const SearchSpace& space, Budget budget,
                        double beta, std::uint64_t seed, int n_candidates = 2000);

/// CSV export: iteration, one column per decoded parameter, observed,
/// predicted (empty for the initial design).
void write_trace_csv(std::ostream& os, const OptimizationTrace& trace, const SearchSpace& space);

}  // namespace binopt::bo
