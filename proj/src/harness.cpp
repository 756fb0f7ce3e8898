#include "binopt/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "binopt/image_io.hpp"

namespace binopt::harness {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

std::string fmt(double v, const char* format = "%.6f") {
    char buf[64];
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string csv_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot open for writing: " + path.string());
        out << content;
        out.flush();
        if (!out) throw IoError("write failed: " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

std::vector<DatasetEntry> load_dataset(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw IoError("cannot open manifest: " + manifest.string());
    const std::filesystem::path base = manifest.parent_path();

    std::vector<DatasetEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;

        const std::vector<std::string> fields = split_tabs(line);
        const std::string where = manifest.string() + ":" + std::to_string(lineno);
        if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty())
            throw IoError(where + ": expected `id<TAB>image_path[<TAB>truth_path]`");

        DatasetEntry e;
        e.id = fields[0];
        e.image_path = base / fields[1];
        if (fields.size() == 3 && !fields[2].empty()) e.truth_path = base / fields[2];

        for (const auto& other : entries)
            if (other.id == e.id) throw IoError(where + ": duplicate id \"" + e.id + "\"");
        if (!std::filesystem::exists(e.image_path))
            throw IoError(where + ": missing image file " + e.image_path.string());
        if (e.has_truth() && !std::filesystem::exists(e.truth_path))
            throw IoError(where + ": missing truth file " + e.truth_path.string());
        entries.push_back(std::move(e));
    }
    return entries;
}

std::uint64_t entry_seed(std::uint64_t global_seed, const std::string& id) {
    return bo::mix_seed(global_seed, bo::fnv1a(id));
}

RunResult run_entry(const DatasetEntry& entry, bo::Budget budget, double beta, std::uint64_t seed,
                    bool invert_input, const bo::SearchSpace& space) {
    if (!entry.has_truth())
        throw ParameterError("run_entry: entry \"" + entry.id + "\" has no ground truth");

    const auto t0 = std::chrono::steady_clock::now();
    GrayImage image = load_image(entry.image_path);
    if (invert_input) image = invert(image);
    const BinaryImage truth = binary_from_gray(load_image(entry.truth_path));

    const bo::Objective objective = bo::fmeasure_objective(image, truth);
    bo::OptimizeResult opt = bo::optimize(objective, space, budget, beta, seed);

    RunResult r;
    r.entry_id = entry.id;
    r.best_params = bo::to_params(opt.best);
    r.best_observed = opt.best_observed;
    r.trace = std::move(opt.trace);
    // final report recomputed from scratch, not taken from the loop
    r.report = metrics::evaluate_pair(binarize(image, r.best_params), truth);
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

namespace {

MetricSummary summarize(const std::vector<double>& xs) {
    MetricSummary s;
    s.n = int(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / s.n;
    double dev = 0.0;
    for (double x : xs) dev += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(dev / s.n);  // population convention
    return s;
}

std::optional<MetricSummary> collect(const std::vector<metrics::MetricReport>& reports,
                                     std::optional<double> (metrics::MetricReport::*get)() const) {
    std::vector<double> xs;
    for (const auto& r : reports)
        if (auto v = (r.*get)()) xs.push_back(*v);
    if (xs.empty()) return std::nullopt;
    return summarize(xs);
}

std::optional<MetricSummary> collect_field(const std::vector<metrics::MetricReport>& reports,
                                           std::optional<double> metrics::MetricReport::*field) {
    std::vector<double> xs;
    for (const auto& r : reports)
        if (r.*field) xs.push_back(*(r.*field));
    if (xs.empty()) return std::nullopt;
    return summarize(xs);
}

}  // namespace

Summary aggregate_reports(const std::vector<metrics::MetricReport>& reports) {
    if (reports.empty()) throw ParameterError("aggregate: empty result list");
    Summary s;
    s.entries = int(reports.size());
    s.fmeasure = collect_field(reports, &metrics::MetricReport::fmeasure);
    s.psnr = collect_field(reports, &metrics::MetricReport::psnr);
    s.drd = collect_field(reports, &metrics::MetricReport::drd);
    s.nrm_x100 = collect(reports, &metrics::MetricReport::nrm_x100);
    s.mpm_x1000 = collect(reports, &metrics::MetricReport::mpm_x1000);
    return s;
}

Summary aggregate(const std::vector<RunResult>& results) {
    std::vector<metrics::MetricReport> reports;
    reports.reserve(results.size());
    for (const auto& r : results) reports.push_back(r.report);
    return aggregate_reports(reports);
}

std::string format_cell(const std::optional<MetricSummary>& s) {
    if (!s) return "-";
    char buf[80];
    if (std::isinf(s->mean) || std::isinf(s->stddev)) {
        std::snprintf(buf, sizeof buf, "%s±%s", fmt(s->mean, "%.2f").c_str(),
                      fmt(s->stddev, "%.2f").c_str());
    } else {
        std::snprintf(buf, sizeof buf, "%.2f±%.2f", s->mean, s->stddev);
    }
    return buf;
}

namespace {

struct EntryOutcome {
    bool ok = false;
    std::string error;
    RunResult result;
    metrics::MetricReport otsu_report;
    BinaryImage bo_image;
    BinaryImage otsu_image;
    StageOutputs stages;
};

std::string results_csv(const std::vector<EntryOutcome>& outcomes,
                        const std::vector<DatasetEntry>& entries) {
    std::ostringstream os;
    os << "method,id,tau1,ws,tau2,ms,ws_h,ws_l,fmeasure,psnr,drd,nrm_x100,mpm_x1000\n";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const EntryOutcome& o = outcomes[i];
        if (!o.ok) continue;
        const ParamVector& p = o.result.best_params;
        const metrics::MetricReport& m = o.result.report;
        os << "bo," << entries[i].id << "," << fmt(p.tau1, "%.10g") << "," << p.ws << ","
           << fmt(p.tau2, "%.10g") << "," << p.ms << "," << p.ws_h << "," << p.ws_l << ","
           << csv_opt(m.fmeasure) << "," << csv_opt(m.psnr) << "," << csv_opt(m.drd) << ","
           << csv_opt(m.nrm_x100()) << "," << csv_opt(m.mpm_x1000()) << "\n";
    }
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const EntryOutcome& o = outcomes[i];
        if (!o.ok) continue;
        const metrics::MetricReport& m = o.otsu_report;
        os << "otsu," << entries[i].id << ",,,,,,," << csv_opt(m.fmeasure) << ","
           << csv_opt(m.psnr) << "," << csv_opt(m.drd) << "," << csv_opt(m.nrm_x100()) << ","
           << csv_opt(m.mpm_x1000()) << "\n";
    }
    return os.str();
}

}  // namespace

std::string format_summary_table(const BatchResult& batch) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-8s %4s %15s %15s %15s %15s %15s\n", "method", "n",
                  "fmeasure", "psnr", "drd", "nrm_x100", "mpm_x1000");
    os << buf;
    const auto row = [&](const char* name, const Summary& s) {
        std::snprintf(buf, sizeof buf, "%-8s %4d %15s %15s %15s %15s %15s\n", name, s.entries,
                      format_cell(s.fmeasure).c_str(), format_cell(s.psnr).c_str(),
                      format_cell(s.drd).c_str(), format_cell(s.nrm_x100).c_str(),
                      format_cell(s.mpm_x1000).c_str());
        os << buf;
    };
    if (batch.bo_summary.entries > 0) row("bo", batch.bo_summary);
    if (batch.otsu_summary.entries > 0) row("otsu", batch.otsu_summary);
    for (const auto& [id, err] : batch.failures) os << "failed   " << id << ": " << err << "\n";
    return os.str();
}

BatchResult run_batch(const std::vector<DatasetEntry>& entries, const BatchConfig& config) {
    if (entries.empty()) throw ParameterError("run_batch: empty dataset");
    if (config.workers < 1) throw ParameterError("run_batch: workers must be >= 1");
    std::filesystem::create_directories(config.out_dir);

    const int n = int(entries.size());
    std::vector<EntryOutcome> outcomes(n);

    // entries are independent; outputs are collected by index, so the schedule
    // and worker count never change the results
#pragma omp parallel for schedule(dynamic, 1) num_threads(config.workers)
    for (int i = 0; i < n; ++i) {
        EntryOutcome& o = outcomes[i];
        try {
            o.result = run_entry(entries[i], config.budget, config.beta,
                                 entry_seed(config.seed, entries[i].id), config.invert,
                                 config.space);
            GrayImage image = load_image(entries[i].image_path);
            if (config.invert) image = invert(image);
            const BinaryImage truth = binary_from_gray(load_image(entries[i].truth_path));
            o.bo_image = config.dump_stages ? binarize(image, o.result.best_params, &o.stages)
                                            : binarize(image, o.result.best_params);
            o.otsu_image = otsu_binarize(image);
            o.otsu_report = metrics::evaluate_pair(o.otsu_image, truth);
            o.ok = true;
        } catch (const std::exception& e) {
            o.error = e.what();
        }
    }

    BatchResult batch;
    std::vector<metrics::MetricReport> bo_reports, otsu_reports;
    for (int i = 0; i < n; ++i) {
        EntryOutcome& o = outcomes[i];
        if (!o.ok) {
            batch.failures.emplace_back(entries[i].id, o.error);
            continue;
        }
        bo_reports.push_back(o.result.report);
        otsu_reports.push_back(o.otsu_report);

        const std::filesystem::path stem = config.out_dir / entries[i].id;
        save_image(o.bo_image, stem.string() + "_bin.pgm");
        save_image(o.otsu_image, stem.string() + "_otsu.pgm");
        {
            std::ostringstream os;
            bo::write_trace_csv(os, o.result.trace, config.space);
            write_text_file(stem.string() + "_trace.csv", os.str());
        }
        if (config.dump_stages) {
            save_image(quantize8(o.stages.adaptive), stem.string() + "_stage1.pgm");
            save_image(quantize8(o.stages.highband), stem.string() + "_stage2.pgm");
            save_image(o.stages.lowmask, stem.string() + "_stage3.pgm");
            save_image(quantize8(o.stages.combined), stem.string() + "_stage4.pgm");
            save_image(o.stages.final, stem.string() + "_final.pgm");
        }
        batch.results.push_back(std::move(o.result));
    }

    if (!bo_reports.empty()) {
        batch.bo_summary = aggregate_reports(bo_reports);
        batch.otsu_summary = aggregate_reports(otsu_reports);
    }

    write_text_file(config.out_dir / "results.csv", results_csv(outcomes, entries));
    write_text_file(config.out_dir / "summary.txt", format_summary_table(batch));
    return batch;
}

}  // namespace binopt::harness
