#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "strokeml/data/csv.hpp"
#include "strokeml/error.hpp"
#include "strokeml/eval/validation.hpp"
#include "strokeml/io/codec.hpp"
#include "strokeml/pipeline/bundle.hpp"
#include "strokeml/pipeline/config.hpp"
#include "strokeml/pipeline/report.hpp"
#include "strokeml/pipeline/run.hpp"

namespace fs = std::filesystem;
using namespace strokeml;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "strokeml-out";
    std::vector<std::string> formats{"csv"};
};

void add_common(CLI::App* cmd, Common& c, bool needs_config = true) {
    auto* opt = cmd->add_option("--config", c.config, "YAML configuration file");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Override the configured seed");
    cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
    cmd->add_option("--format", c.formats, "Report formats: csv, json, svg")->capture_default_str()->expected(1, 3);
}

pipeline::PipelineConfig load_single(const Common& c) {
    auto config = pipeline::load_config(c.config);
    if (c.seed) config.seed = *c.seed;
    return config;
}

std::string headline(const eval::MetricsReport& m) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.2f/%.2f/%.2f/%.2f", 100 * m.accuracy, 100 * m.precision, 100 * m.recall, 100 * m.f1);
    return buf;
}

void write_reports(const std::vector<pipeline::RunRecord>& records, const Common& c) {
    fs::create_directories(c.out);
    pipeline::emit_report(records, c.out, pipeline::ReportFormat::Json);
    for (const auto& f : c.formats) {
        const auto fmt = pipeline::parse_report_format(f);
        if (fmt != pipeline::ReportFormat::Json) pipeline::emit_report(records, c.out, fmt);
    }
    std::cout << "reports written to " << c.out << "\n";
}

void print_folds(const pipeline::RunRecord& r) {
    std::printf("%-6s %9s %10s %8s %8s\n", "Fold", "Accuracy", "Precision", "Recall", "F1");
    for (std::size_t f = 0; f < r.per_fold.size(); ++f) {
        const auto& m = r.per_fold[f];
        std::printf("%-6zu %9.2f %10.2f %8.2f %8.2f\n", f + 1, 100 * m.accuracy, 100 * m.precision, 100 * m.recall,
                    100 * m.f1);
    }
    const auto& m = r.metrics;
    std::printf("%-6s %9.2f %10.2f %8.2f %8.2f\n", r.per_fold.empty() ? "Test" : "Mean", 100 * m.accuracy,
                100 * m.precision, 100 * m.recall, 100 * m.f1);
}

int inspect(const std::string& path) {
    const auto loaded = data::load_features(path);
    const auto counts = loaded.y.counts();
    std::size_t augmented = 0;
    for (const auto& id : loaded.X.sample_ids()) augmented += data::is_augmented_id(id) ? 1 : 0;
    std::cout << "file:      " << path << "\n"
              << "rows:      " << loaded.X.n_samples() << "\n"
              << "features:  " << loaded.X.n_features() << "\n"
              << "augmented: " << augmented << "\n"
              << "sha256:    " << io::sha256_file(path) << "\n";
    for (std::size_t c = 0; c < counts.size(); ++c) std::cout << "class " << loaded.y.class_names[c] << ": " << counts[c] << "\n";
    if (loaded.split) {
        for (auto s : {data::Split::Train, data::Split::Test, data::Split::Validation}) {
            std::cout << "split " << data::to_string(s) << ": " << loaded.split->indices(s).size() << "\n";
        }
    }
    std::cout << "OK\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feature selection, classification and evaluation for stroke CT feature vectors"};
    app.require_subcommand(1);

    Common run_opts, grid_opts, cv_opts, curve_opts, bench_opts, report_opts;
    std::size_t bench_in_run = 0;
    auto* run_cmd = app.add_subcommand("run", "Evaluate one configuration and save a model bundle");
    add_common(run_cmd, run_opts);
    run_cmd->add_option("--bench", bench_in_run, "Also benchmark with this many repetitions");

    std::size_t parallel = 1;
    auto* grid_cmd = app.add_subcommand("grid", "Evaluate every cell of a configuration grid");
    add_common(grid_cmd, grid_opts);
    grid_cmd->add_option("--parallel", parallel, "Cells evaluated concurrently")->capture_default_str();

    std::optional<std::size_t> cv_k;
    auto* cv_cmd = app.add_subcommand("cv", "Stratified k-fold cross-validation of one configuration");
    add_common(cv_cmd, cv_opts);
    cv_cmd->add_option("--k", cv_k, "Fold count (default: the configured k)");

    std::vector<double> fractions{0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
    auto* curve_cmd = app.add_subcommand("curve", "Learning curve over training-set fractions");
    add_common(curve_cmd, curve_opts);
    curve_cmd->add_option("--fractions", fractions, "Training fractions in (0, 1]")->delimiter(',')->capture_default_str();

    std::size_t repetitions = 5;
    auto* bench_cmd = app.add_subcommand("bench", "Time one fit + predict cycle");
    add_common(bench_cmd, bench_opts);
    bench_cmd->add_option("--repetitions", repetitions, "Timed repetitions (>= 3)")->capture_default_str();

    std::string records_path;
    auto* report_cmd = app.add_subcommand("report", "Re-emit reports from a records.json file");
    add_common(report_cmd, report_opts, false);
    report_cmd->add_option("--records", records_path, "records.json from an earlier run")->required()->check(CLI::ExistingFile);

    std::string features_path;
    auto* inspect_cmd = app.add_subcommand("inspect", "Validate a feature CSV");
    inspect_cmd->add_option("features", features_path, "Feature CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*inspect_cmd) return inspect(features_path);

        if (*run_cmd) {
            const auto config = load_single(run_opts);
            pipeline::RunOptions o;
            o.bench_repetitions = bench_in_run;
            const auto result = pipeline::run(config, o);
            const auto& r = result.record;
            std::cout << r.label << " (" << pipeline::to_string(config.evaluation.mode) << ")\n";
            print_folds(r);
            std::cout << "Accuracy/Precision/Recall/F1 (%): " << headline(r.metrics) << "\n";
            if (r.bench) std::cout << "Time: " << r.bench->time_text() << "  Space: " << r.bench->memory_text() << "\n";
            write_reports({r}, run_opts);
            pipeline::save_bundle(r, *result.model, fs::path(run_opts.out) / "model.bundle");
            std::cout << "bundle: " << (fs::path(run_opts.out) / "model.bundle").string() << "\n";
            return 0;
        }

        if (*grid_cmd) {
            auto grid = pipeline::load_grid(grid_opts.config);
            if (grid_opts.seed) grid.base.seed = *grid_opts.seed;
            std::cerr << "running " << grid.size() << " cells\n";
            const auto result = pipeline::run_grid(grid, parallel);
            std::printf("%-5s %-36s %9s %10s %8s %8s\n", "Rank", "Configuration", "Accuracy", "Precision", "Recall", "F1");
            std::size_t failures = 0;
            for (const auto& row : result.summary) {
                const auto& r = *row.record;
                if (!r.ok) {
                    ++failures;
                    std::printf("%-5s %-36s failed: %s\n", "-", r.label.c_str(), r.error.c_str());
                    continue;
                }
                std::printf("%-5zu %-36s %9.2f %10.2f %8.2f %8.2f%s\n", row.rank, r.label.c_str(), 100 * r.metrics.accuracy,
                            100 * r.metrics.precision, 100 * r.metrics.recall, 100 * r.metrics.f1, row.best ? "  <- best" : "");
            }
            write_reports(result.records, grid_opts);
            return failures == result.records.size() ? 2 : 0;
        }

        if (*cv_cmd) {
            auto config = load_single(cv_opts);
            config.evaluation.mode = pipeline::Evaluation::Mode::KFold;
            if (cv_k) config.evaluation.k = *cv_k;
            pipeline::RunOptions o;
            o.fit_final_model = false;
            const auto r = pipeline::run(config, o).record;
            std::cout << config.evaluation.k << "-fold cross-validation for " << r.label << "\n";
            print_folds(r);
            write_reports({r}, cv_opts);
            return 0;
        }

        if (*curve_cmd) {
            const auto config = load_single(curve_opts);
            pipeline::RunOptions o;
            o.fit_final_model = false;
            o.curve_fractions = fractions;
            const auto r = pipeline::run(config, o).record;
            std::printf("%-9s %8s %14s %14s\n", "Fraction", "Samples", "Accuracy", "F1");
            for (const auto& c : r.curve) {
                std::printf("%-9.3g %8zu %7.2f ± %4.2f %7.2f ± %4.2f\n", c.fraction, c.n_samples, 100 * c.accuracy.mean,
                            100 * c.accuracy.std, 100 * c.f1.mean, 100 * c.f1.std);
            }
            write_reports({r}, curve_opts);
            return 0;
        }

        if (*bench_cmd) {
            const auto config = load_single(bench_opts);
            pipeline::RunOptions o;
            o.fit_final_model = false;
            o.bench_repetitions = repetitions;
            const auto r = pipeline::run(config, o).record;
            std::cout << r.label << "  Time: " << r.bench->time_text() << "  Space: " << r.bench->memory_text() << "\n"
                      << "memory: " << r.bench->mechanism << "\n"
                      << "kernels: " << r.kernel_isa << "\n";
            write_reports({r}, bench_opts);
            return 0;
        }

        if (*report_cmd) {
            const auto records = pipeline::load_records(records_path);
            write_reports(records, report_opts);
            return 0;
        }
    } catch (const CsvError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_validation_error(e.code()) ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
