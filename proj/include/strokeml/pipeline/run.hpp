#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "strokeml/data/csv.hpp"
#include "strokeml/eval/bench.hpp"
#include "strokeml/eval/metrics.hpp"
#include "strokeml/eval/roc.hpp"
#include "strokeml/eval/validation.hpp"
#include "strokeml/pipeline/config.hpp"
#include "strokeml/pipeline/model.hpp"

namespace strokeml::pipeline {

struct RunOptions {
    /// Fit a final model on all training rows for the bundle.
    bool fit_final_model = true;
    /// Attach a BenchReport with this many repetitions (0 = none).
    std::size_t bench_repetitions = 0;
    /// Attach learning-curve rows for these fractions (empty = none).
    std::vector<double> curve_fractions;
};

/// Everything needed to interpret and reproduce one pipeline evaluation.
struct RunRecord {
    std::size_t index = 0;  // position in its grid, 0 for single runs
    PipelineConfig config;
    std::string label;
    bool ok = true;
    std::string error_code;
    std::string error;

    /// kfold: mean over folds. holdout: the test split.
    eval::MetricsReport metrics;
    eval::MetricsReport metrics_weighted;
    std::vector<eval::MetricsReport> per_fold;
    std::vector<eval::MetricsReport> per_fold_weighted;
    std::vector<std::size_t> train_sizes;
    std::vector<std::size_t> test_sizes;
    bool split_column_used = false;
    eval::ConfusionMatrix confusion;
    std::vector<eval::RocCurve> roc;
    std::optional<eval::BenchReport> bench;
    std::vector<eval::CurveRow> curve;

    std::string features_sha256;
    std::size_t n_samples = 0;
    std::size_t n_features = 0;
    std::vector<std::string> class_names;
    std::string kernel_isa;
    std::string timestamp;
};

/// `include_timestamp = false` gives the reproducible part of the record.
nlohmann::json record_to_json(const RunRecord& r, bool include_timestamp = true);
RunRecord record_from_json(const nlohmann::json& j);

struct RunResult {
    RunRecord record;
    std::optional<FittedPipeline> model;
};

/// Loads the features file and evaluates the config. Errors carry the config
/// label as context.
RunResult run(const PipelineConfig& config, const RunOptions& options = {});

/// Same, on features already in memory.
RunResult run_loaded(const PipelineConfig& config, const data::LoadedFeatures& features,
                     const std::string& features_sha256, const RunOptions& options = {});

struct SummaryRow {
    std::size_t index = 0;
    std::size_t rank = 0;  // 1-based; 0 for failed cells
    bool best = false;
    const RunRecord* record = nullptr;
};

/// Successful cells by accuracy desc, then F1 desc, then grid index; failed
/// cells follow in grid order.
std::vector<SummaryRow> rank_records(const std::vector<RunRecord>& records);

struct GridResult {
    std::vector<RunRecord> records;  // grid order
    std::vector<SummaryRow> summary;
};

/// Runs up to `parallelism` cells at once. A failing cell is recorded with
/// ok = false and never stops the others. Each features file is read once.
GridResult run_grid(const std::vector<PipelineConfig>& cells, std::size_t parallelism, const RunOptions& options = {});
GridResult run_grid(const ExperimentGrid& grid, std::size_t parallelism, const RunOptions& options = {});

}  // namespace strokeml::pipeline
