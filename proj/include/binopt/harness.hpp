#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "binopt/bayesopt.hpp"
#include "binopt/metrics.hpp"

namespace binopt::harness {

struct DatasetEntry {
    std::string id;
    std::filesystem::path image_path;
    std::filesystem::path truth_path;  // empty for binarize-only entries
    bool has_truth() const { return !truth_path.empty(); }
};

/// Parse `id <TAB> image_path [<TAB> truth_path]` lines; paths are resolved
/// relative to the manifest. Blank lines and lines starting with '#' are
/// skipped. Missing files, duplicate ids and malformed lines raise IoError
/// with the line number.
std::vector<DatasetEntry> load_dataset(const std::filesystem::path& manifest);

struct RunResult {
    std::string entry_id;
    ParamVector best_params;
    double best_observed = 0.0;
    metrics::MetricReport report;  // recomputed from best_params, not the in-loop value
    bo::OptimizationTrace trace;
    double wall_time = 0.0;  // seconds; reporting only, never written to CSV
};

/// Optimize F-measure for one entry (ground truth required), then recompute
/// the final report from the best parameters.
RunResult run_entry(const DatasetEntry& entry, bo::Budget budget, double beta, std::uint64_t seed,
                    bool invert_input = false,
                    const bo::SearchSpace& space = bo::SearchSpace::standard());

/// Per-entry seed: batches stay reproducible regardless of entry order.
std::uint64_t entry_seed(std::uint64_t global_seed, const std::string& id);

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;  // population (N divisor)
    int n = 0;
};

struct Summary {
    std::optional<MetricSummary> fmeasure, psnr, drd, nrm_x100, mpm_x1000;
    int entries = 0;
};

/// Mean and population standard deviation per metric, over entries where the
/// metric is defined. ParameterError on an empty list.
Summary aggregate(const std::vector<RunResult>& results);
Summary aggregate_reports(const std::vector<metrics::MetricReport>& reports);

/// "92.00±2.00" style cell; "-" when absent.
std::string format_cell(const std::optional<MetricSummary>& s);

struct BatchConfig {
    bo::Budget budget{10, 30};
    double beta = 2.0;
    std::uint64_t seed = 1;
    int workers = 1;
    std::filesystem::path out_dir = ".";
    bool dump_stages = false;
    bool invert = false;
    bo::SearchSpace space = bo::SearchSpace::standard();
};

struct BatchResult {
    std::vector<RunResult> results;  // successful entries, in manifest order
    std::vector<std::pair<std::string, std::string>> failures;  // (id, error)
    Summary bo_summary;
    Summary otsu_summary;
};

/// Run every entry plus the Otsu baseline and write results.csv, per-entry
/// trace CSVs, binarized images and summary.txt into out_dir. Entries run in
/// parallel up to config.workers; outputs are collected in manifest order and
/// are byte-identical for a fixed (seed, budget, beta) regardless of the
/// worker count.
BatchResult run_batch(const std::vector<DatasetEntry>& entries, const BatchConfig& config);

std::string format_summary_table(const BatchResult& batch);

}  // namespace binopt::harness
