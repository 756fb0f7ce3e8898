// binopt: binarize degraded document images, tune the six pipeline controls
// per image with GP-based search, and evaluate against ground truth.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "binopt/harness.hpp"
#include "binopt/image_io.hpp"

namespace {

using namespace binopt;

struct UsageExit {
    std::string message;
};

GrayImage load_input(const std::filesystem::path& path) {
    try {
        return load_image(path);
    } catch (const IoError& e) {
        throw UsageExit{e.what()};
    }
}

// ---- config file: `key = value` lines, '#' comments ------------------------

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageExit{"cannot open config: " + path.string()};
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw UsageExit{path.string() + ":" + std::to_string(lineno) +
                            ": expected `key = value`"};
        kv[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
    }
    return kv;
}

std::vector<double> parse_number_list(const std::string& s, std::size_t expect,
                                      const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(trim(tok), &pos));
        } catch (const std::exception&) {
            throw UsageExit{what + ": cannot parse \"" + tok + "\""};
        }
    }
    if (out.size() != expect)
        throw UsageExit{what + ": expected " + std::to_string(expect) + " comma-separated values"};
    return out;
}

// Shared knobs for `binarize --auto` and `benchmark`.
struct RunOptions {
    std::vector<int> budget;  // {n_init, n_iter}
    double beta = 2.0;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out_dir = ".";
    bool dump_stages = false;
    bool invert = false;
    std::string config_path;

    CLI::Option* budget_opt = nullptr;
    CLI::Option* beta_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
    CLI::Option* out_opt = nullptr;

    bo::SearchSpace space = bo::SearchSpace::standard();

    void add_common(CLI::App* cmd, bool with_workers) {
        budget_opt = cmd->add_option("--budget", budget,
                                     "initial design size and iteration count (I,N)")
                         ->delimiter(',')
                         ->expected(2);
        beta_opt = cmd->add_option("--beta", beta, "UCB exploration weight");
        seed_opt = cmd->add_option("--seed", seed, "random seed; all randomness derives from it");
        if (with_workers)
            workers_opt = cmd->add_option("--workers", workers, "parallel dataset entries");
        out_opt = cmd->add_option("--out", out_dir, "output directory");
        cmd->add_flag("--dump-stages", dump_stages, "write every pipeline stage image");
        cmd->add_flag("--invert", invert, "invert input photometry (light text on dark)");
        cmd->add_option("--config", config_path, "key = value defaults file (flags win)");
    }

    // config supplies defaults for anything the command line left unset
    void apply_config() {
        if (config_path.empty()) return;
        const auto kv = parse_config(config_path);
        for (const auto& [key, value] : kv) {
            if (key == "budget") {
                if (!budget_opt->count()) {
                    const auto v = parse_number_list(value, 2, "config budget");
                    budget = {int(v[0]), int(v[1])};
                }
            } else if (key == "beta") {
                if (!beta_opt->count()) beta = std::stod(value);
            } else if (key == "seed") {
                if (!seed_opt->count()) seed = std::stoull(value);
            } else if (key == "workers") {
                if (!workers_opt || !workers_opt->count()) workers = std::stoi(value);
            } else if (key == "out") {
                if (!out_opt->count()) out_dir = value;
            } else if (key == "dump_stages") {
                if (!dump_stages) dump_stages = value == "1" || value == "true";
            } else if (key == "invert") {
                if (!invert) invert = value == "1" || value == "true";
            } else if (key.rfind("space.", 0) == 0) {
                apply_space_override(key.substr(6), value);
            } else {
                throw UsageExit{"config: unknown key \"" + key + "\""};
            }
        }
    }

    // overrides narrow a dimension; the master bounds stay authoritative
    void apply_space_override(const std::string& name, const std::string& value) {
        const auto v = parse_number_list(value, 2, "config space." + name);
        for (auto& dim : space.dims) {
            if (dim.name != name) continue;
            if (!(v[0] < v[1]) || v[0] < dim.lower || v[1] > dim.upper)
                throw UsageExit{"config space." + name + ": bounds must be a subrange of [" +
                                std::to_string(dim.lower) + ", " + std::to_string(dim.upper) + "]"};
            dim.lower = v[0];
            dim.upper = v[1];
            return;
        }
        throw UsageExit{"config space." + name + ": unknown dimension"};
    }

    bo::Budget make_budget() const {
        if (budget.empty()) return {};
        return {budget[0], budget[1]};
    }
};

int round_odd_up(double v, const char* name) {
    int i = int(std::lround(v));
    if (i % 2 == 0) {
        std::fprintf(stderr, "note: %s rounded up to the next odd value %d\n", name, i + 1);
        ++i;
    }
    return i;
}

ParamVector params_from_values(const std::vector<double>& v) {
    ParamVector p;
    p.tau1 = v[0];
    p.ws = round_odd_up(v[1], "ws");
    p.tau2 = v[2];
    p.ms = int(std::lround(v[3]));
    p.ws_h = round_odd_up(v[4], "ws_h");
    p.ws_l = round_odd_up(v[5], "ws_l");
    return p;
}

void print_report(const metrics::MetricReport& r) {
    const auto cell = [](const std::optional<double>& v) -> std::string {
        if (!v) return "-";
        if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", *v);
        return buf;
    };
    std::printf("%-12s %10s\n", "metric", "value");
    std::printf("%-12s %10s\n", "F-measure", cell(r.fmeasure).c_str());
    std::printf("%-12s %10s\n", "PSNR", cell(r.psnr).c_str());
    std::printf("%-12s %10s\n", "DRD", cell(r.drd).c_str());
    std::printf("%-12s %10s\n", "NRM (x1e-2)", cell(r.nrm_x100()).c_str());
    std::printf("%-12s %10s\n", "MPM (x1e-3)", cell(r.mpm_x1000()).c_str());
    std::printf("fmeasure,psnr,drd,nrm_x100,mpm_x1000\n");
    std::printf("%s,%s,%s,%s,%s\n", cell(r.fmeasure).c_str(), cell(r.psnr).c_str(),
                cell(r.drd).c_str(), cell(r.nrm_x100()).c_str(), cell(r.mpm_x1000()).c_str());
}

void write_stage_dumps(const StageOutputs& stages, const std::filesystem::path& stem) {
    save_image(quantize8(stages.adaptive), stem.string() + "_stage1.pgm");
    save_image(quantize8(stages.highband), stem.string() + "_stage2.pgm");
    save_image(stages.lowmask, stem.string() + "_stage3.pgm");
    save_image(quantize8(stages.combined), stem.string() + "_stage4.pgm");
    save_image(stages.final, stem.string() + "_final.pgm");
}

// ---- binarize ---------------------------------------------------------------

struct BinarizeArgs {
    std::string input;
    std::vector<double> params;
    bool auto_tune = false;
    std::string truth_path;
    RunOptions run;
    CLI::Option* params_opt = nullptr;
};

int cmd_binarize(BinarizeArgs& a) {
    a.run.apply_config();
    const bool explicit_params = a.params_opt->count() > 0;
    if (explicit_params == a.auto_tune)
        throw UsageExit{"binarize: pass exactly one of --params or --auto"};
    if (a.auto_tune && a.truth_path.empty())
        throw UsageExit{"binarize: --auto needs --truth (the objective scores against it)"};

    GrayImage image = load_input(a.input);
    if (a.run.invert) image = invert(image);

    const std::filesystem::path out_dir = a.run.out_dir;
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path stem = out_dir / std::filesystem::path(a.input).stem();

    ParamVector params;
    if (explicit_params) {
        params = params_from_values(a.params);
    } else {
        const BinaryImage truth = binary_from_gray(load_input(a.truth_path));
        const bo::Objective objective = bo::fmeasure_objective(image, truth);
        const bo::OptimizeResult res = bo::optimize(objective, a.run.space, a.run.make_budget(),
                                                    a.run.beta, a.run.seed);
        params = bo::to_params(res.best);
        {
            std::ostringstream os;
            bo::write_trace_csv(os, res.trace, a.run.space);
            std::ofstream f(stem.string() + "_trace.csv", std::ios::binary);
            f << os.str();
        }
        std::printf("best: tau1=%g ws=%d tau2=%g ms=%d ws_h=%d ws_l=%d (objective %.4f)\n",
                    params.tau1, params.ws, params.tau2, params.ms, params.ws_h, params.ws_l,
                    res.best_observed);
    }

    StageOutputs stages;
    const BinaryImage out =
        a.run.dump_stages ? binarize(image, params, &stages) : binarize(image, params);
    save_image(out, stem.string() + "_bin.pgm");
    if (a.run.dump_stages) write_stage_dumps(stages, stem);

    if (a.auto_tune) {
        const BinaryImage truth = binary_from_gray(load_input(a.truth_path));
        print_report(metrics::evaluate_pair(out, truth));
    }
    std::printf("wrote %s_bin.pgm\n", stem.string().c_str());
    return 0;
}

// ---- evaluate ---------------------------------------------------------------

int cmd_evaluate(const std::string& output_path, const std::string& truth_path) {
    const BinaryImage output = binary_from_gray(load_input(output_path));
    const BinaryImage truth = binary_from_gray(load_input(truth_path));
    try {
        print_report(metrics::evaluate_pair(output, truth));
    } catch (const ParameterError& e) {
        throw UsageExit{e.what()};
    }
    return 0;
}

// ---- benchmark ---------------------------------------------------------------

struct BenchmarkArgs {
    std::string manifest;
    RunOptions run;
};

int cmd_benchmark(BenchmarkArgs& a) {
    a.run.apply_config();
    std::vector<harness::DatasetEntry> entries;
    try {
        entries = harness::load_dataset(a.manifest);
    } catch (const IoError& e) {
        throw UsageExit{e.what()};
    }
    if (entries.empty()) throw UsageExit{"benchmark: manifest lists no entries"};
    for (const auto& e : entries)
        if (!e.has_truth())
            throw UsageExit{"benchmark: entry \"" + e.id + "\" has no ground truth"};

    harness::BatchConfig config;
    config.budget = a.run.make_budget();
    config.beta = a.run.beta;
    config.seed = a.run.seed;
    config.workers = a.run.workers;
    config.out_dir = a.run.out_dir;
    config.dump_stages = a.run.dump_stages;
    config.invert = a.run.invert;
    config.space = a.run.space;

    const harness::BatchResult batch = harness::run_batch(entries, config);
    std::fputs(harness::format_summary_table(batch).c_str(), stdout);
    for (const auto& r : batch.results)
        std::fprintf(stderr, "entry %s finished in %.1fs\n", r.entry_id.c_str(), r.wall_time);

    return batch.results.empty() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Document image binarization tuned per image by GP search"};
    app.require_subcommand(1);

    BinarizeArgs bin;
    CLI::App* binarize_cmd = app.add_subcommand("binarize", "binarize one image");
    binarize_cmd->add_option("input", bin.input, "input image (P5/P6, optionally PNG)")
        ->required();
    bin.params_opt =
        binarize_cmd
            ->add_option("--params", bin.params, "explicit tau1,ws,tau2,ms,ws_h,ws_l; skips tuning")
            ->delimiter(',')
            ->expected(6);
    binarize_cmd->add_flag("--auto", bin.auto_tune, "tune parameters for this image");
    binarize_cmd->add_option("--truth", bin.truth_path, "ground-truth image for --auto");
    bin.run.add_common(binarize_cmd, false);

    std::string eval_output, eval_truth;
    CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "score a binarization against truth");
    evaluate_cmd->add_option("output", eval_output, "binarized image")->required();
    evaluate_cmd->add_option("truth", eval_truth, "ground-truth image")->required();

    BenchmarkArgs bench;
    CLI::App* benchmark_cmd = app.add_subcommand("benchmark", "run a manifest of images");
    benchmark_cmd->add_option("manifest", bench.manifest, "tab-separated dataset manifest")
        ->required();
    bench.run.add_common(benchmark_cmd, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (binarize_cmd->parsed()) return cmd_binarize(bin);
        if (evaluate_cmd->parsed()) return cmd_evaluate(eval_output, eval_truth);
        if (benchmark_cmd->parsed()) return cmd_benchmark(bench);
        return 2;
    } catch (const UsageExit& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return 2;
    } catch (const ParameterError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
