#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "strokeml/learn/learner.hpp"
#include "strokeml/reduce/bfo.hpp"
#include "strokeml/reduce/lda.hpp"

namespace strokeml::pipeline {

enum class OptimizerKind { None, BFO, PCA, LDA };

std::string_view to_string(OptimizerKind kind);
/// Case-insensitive; throws Error(InvalidConfig).
OptimizerKind parse_optimizer_kind(std::string_view name);
/// None, BFO, PCA, LDA.
const std::vector<OptimizerKind>& all_optimizer_kinds();

/// The five published backbones. Any other tag is accepted as free text.
const std::vector<std::string>& known_extractors();

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::None;
    /// PCA: fixed component count, or the smallest count reaching `pca_variance`.
    std::optional<std::size_t> pca_components;
    double pca_variance = 0.95;
    double lda_shrinkage = reduce::kDefaultLdaShrinkage;
    reduce::BfoConfig bfo;
    learn::LearnerSpec bfo_learner = learn::LearnerSpec::make(learn::LearnerKind::KNN, {{"k", "5"}});
    std::size_t bfo_folds = 3;

    bool operator==(const OptimizerConfig&) const = default;
};

struct Evaluation {
    enum class Mode { KFold, Holdout } mode = Mode::KFold;
    std::size_t k = 10;
    bool operator==(const Evaluation&) const = default;
};

std::string_view to_string(Evaluation::Mode mode);

struct PipelineConfig {
    std::filesystem::path features_path;
    std::string extractor_tag;
    OptimizerConfig optimizer;
    learn::LearnerSpec classifier;
    bool standardize = true;
    std::uint64_t seed = 0;
    Evaluation evaluation;

    /// "<extractor>+<optimizer>+<classifier>", the label used in reports.
    std::string label() const;
    bool operator==(const PipelineConfig&) const = default;
};

/// Every field, defaults included.
void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);
void to_json(nlohmann::json& j, const OptimizerConfig& c);
void from_json(const nlohmann::json& j, OptimizerConfig& c);

struct FeatureSource {
    std::filesystem::path path;
    std::string extractor_tag;
};

/// Cartesian product features x optimizers x classifiers, extractor-major.
struct ExperimentGrid {
    PipelineConfig base;
    std::vector<FeatureSource> features;
    std::vector<OptimizerConfig> optimizers;
    std::vector<learn::LearnerSpec> classifiers;

    std::size_t size() const { return features.size() * optimizers.size() * classifiers.size(); }
    std::vector<PipelineConfig> expand() const;
};

/// YAML documents. Relative feature paths resolve against `base_dir`.
/// Missing seed, unknown keys and bad values throw Error(InvalidConfig) or the
/// learner's hyperparameter errors.
PipelineConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);
ExperimentGrid parse_grid(std::string_view yaml_text, const std::filesystem::path& base_dir = {});
ExperimentGrid load_grid(const std::filesystem::path& path);

}  // namespace strokeml::pipeline
