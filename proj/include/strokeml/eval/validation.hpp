#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "strokeml/data/dataset.hpp"
#include "strokeml/eval/metrics.hpp"
#include "strokeml/eval/roc.hpp"
#include "strokeml/pipeline/config.hpp"

namespace strokeml::eval {

/// Rows eligible for evaluation and, for augmented rows, the row they were derived from.
struct AugmentationIndex {
    std::vector<std::size_t> originals;
    /// Per row: source row for augmented rows, nullopt for originals and for
    /// augmented rows whose source is not in the table.
    std::vector<std::optional<std::size_t>> source;
    std::vector<bool> augmented;

    explicit AugmentationIndex(const data::FeatureMatrix& X);
    /// Originals in `train_originals` (sorted) plus augmented rows whose source
    /// is among them or absent. Output is sorted.
    std::vector<std::size_t> training_rows(const std::vector<std::size_t>& train_originals) const;
};

struct CvOptions {
    /// Store a SHA-256 of every fold's serialized fitted pipeline.
    bool record_model_digests = false;
};

struct CvResult {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<MetricsReport> per_fold;  // macro
    std::vector<MetricsReport> per_fold_weighted;
    std::vector<ConfusionMatrix> fold_confusion;
    std::vector<std::size_t> train_sizes;
    std::vector<std::size_t> test_sizes;
    /// Arithmetic means of the per-fold fields.
    MetricsReport mean;
    MetricsReport mean_weighted;
    /// Out-of-fold predictions pooled over all folds.
    ConfusionMatrix confusion;
    std::vector<std::size_t> rows;  // row of X for each pooled score
    data::RowMatrix scores;         // one column per declared class
    data::LabelVector y_true;
    std::vector<RocCurve> roc;
    std::vector<std::string> model_digests;
};

/// Mean of every numeric field; zero_division if any input had it.
MetricsReport mean_report(const std::vector<MetricsReport>& reports);

/// Stratified k-fold over the original rows; augmented rows only ever train.
/// Every stage is fitted on the training folds alone.
CvResult cross_validate(const pipeline::PipelineConfig& config, const data::FeatureMatrix& X, const data::LabelVector& y,
                        std::size_t k, std::uint64_t seed, const CvOptions& options = {});

struct HoldoutResult {
    MetricsReport report;
    MetricsReport report_weighted;
    ConfusionMatrix confusion;
    std::vector<std::size_t> rows;
    data::RowMatrix scores;
    data::LabelVector y_true;
    std::vector<RocCurve> roc;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    /// True when the CSV split column drove the partition.
    bool from_split_column = false;
};

/// Fits on the training split and scores the test split. Without `split`, a
/// stratified split with the stroke dataset's shares is drawn from `seed`.
HoldoutResult holdout(const pipeline::PipelineConfig& config, const data::FeatureMatrix& X, const data::LabelVector& y,
                      const std::optional<data::SplitAssignment>& split, std::uint64_t seed);

struct Summary {
    double mean = 0.0;
    double std = 0.0;  // population
};

struct CurveRow {
    double fraction = 0.0;
    std::size_t n_samples = 0;
    Summary accuracy, precision, recall, f1;
};

/// Per fraction (ascending): stratified subsample, then cross_validate.
/// Fraction 1.0 keeps every row in its original order. Throws FractionTooSmall
/// when a class would keep fewer than k samples.
std::vector<CurveRow> learning_curve(const pipeline::PipelineConfig& config, const data::FeatureMatrix& X,
                                     const data::LabelVector& y, std::vector<double> fractions, std::size_t k,
                                     std::uint64_t seed);

/// Population standard deviation.
Summary summarize(const std::vector<double>& values);

void to_json(nlohmann::json& j, const CvResult& r);
void to_json(nlohmann::json& j, const HoldoutResult& r);
void to_json(nlohmann::json& j, const CurveRow& r);
void from_json(const nlohmann::json& j, CurveRow& r);

}  // namespace strokeml::eval
