#pragma once

#include <cstdint>
#include <optional>

#include "json.hpp"

#include "strokeml/data/dataset.hpp"
#include "strokeml/data/scaler.hpp"
#include "strokeml/learn/learner.hpp"
#include "strokeml/pipeline/config.hpp"
#include "strokeml/reduce/bfo.hpp"
#include "strokeml/reduce/lda.hpp"
#include "strokeml/reduce/pca.hpp"

namespace strokeml::pipeline {

/// Scaler, optimizer and classifier fitted on one training set.
struct FittedPipeline {
    std::optional<data::Scaler> scaler;
    OptimizerKind optimizer = OptimizerKind::None;
    std::optional<reduce::PcaModel> pca;
    std::optional<reduce::LdaModel> lda;
    std::optional<reduce::FeatureMask> mask;
    learn::TrainedClassifier classifier;

    /// Input width expected by transform().
    std::size_t n_features() const;
    data::FeatureMatrix transform(const data::FeatureMatrix& X) const;
    data::LabelVector predict(const data::FeatureMatrix& X) const;
    data::RowMatrix predict_scores(const data::FeatureMatrix& X) const;

    nlohmann::json to_json() const;
    static FittedPipeline from_json(const nlohmann::json& j);
};

/// Fits every stage on (X_train, y_train) only. Stage seeds derive from `seed`.
FittedPipeline fit_pipeline(const PipelineConfig& config, const data::FeatureMatrix& X_train,
                            const data::LabelVector& y_train, std::uint64_t seed);

}  // namespace strokeml::pipeline
