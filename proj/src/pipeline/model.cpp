#include "strokeml/pipeline/model.hpp"

#include "strokeml/error.hpp"
#include "strokeml/reduce/wrapper.hpp"
#include "strokeml/rng.hpp"

namespace strokeml::pipeline {
namespace {

enum Stream : std::uint64_t { kClassifier = 1, kBfo = 2, kWrapperFolds = 3 };

}  // namespace

std::size_t FittedPipeline::n_features() const {
    if (scaler) return scaler->n_features();
    if (pca) return pca->n_features();
    if (lda) return lda->n_features();
    if (mask) return mask->selected.size();
    return classifier.n_features();
}

data::FeatureMatrix FittedPipeline::transform(const data::FeatureMatrix& X) const {
    if (X.n_features() != n_features()) {
        throw Error(ErrorCode::DimensionMismatch, "pipeline expects " + std::to_string(n_features()) + " features, got " +
                                                      std::to_string(X.n_features()));
    }
    data::FeatureMatrix Z = scaler ? data::standardize_apply(*scaler, X) : X;
    switch (optimizer) {
        case OptimizerKind::None: break;
        case OptimizerKind::PCA: Z = reduce::pca_transform(*pca, Z); break;
        case OptimizerKind::LDA: Z = reduce::lda_transform(*lda, Z); break;
        case OptimizerKind::BFO: Z = Z.select_columns(mask->indices()); break;
    }
    return Z;
}

data::LabelVector FittedPipeline::predict(const data::FeatureMatrix& X) const { return classifier.predict(transform(X)); }

data::RowMatrix FittedPipeline::predict_scores(const data::FeatureMatrix& X) const {
    return classifier.predict_scores(transform(X));
}

nlohmann::json FittedPipeline::to_json() const {
    nlohmann::json j = {{"optimizer", std::string(to_string(optimizer))}, {"classifier", classifier.to_json()}};
    j["scaler"] = scaler ? nlohmann::json(*scaler) : nlohmann::json(nullptr);
    if (pca) j["pca"] = *pca;
    if (lda) j["lda"] = *lda;
    if (mask) j["mask"] = *mask;
    return j;
}

FittedPipeline FittedPipeline::from_json(const nlohmann::json& j) {
    try {
        FittedPipeline p;
        p.optimizer = parse_optimizer_kind(j.at("optimizer").get<std::string>());
        if (!j.at("scaler").is_null()) p.scaler = j.at("scaler").get<data::Scaler>();
        switch (p.optimizer) {
            case OptimizerKind::None: break;
            case OptimizerKind::PCA: p.pca = j.at("pca").get<reduce::PcaModel>(); break;
            case OptimizerKind::LDA: p.lda = j.at("lda").get<reduce::LdaModel>(); break;
            case OptimizerKind::BFO: p.mask = j.at("mask").get<reduce::FeatureMask>(); break;
        }
        p.classifier = learn::TrainedClassifier::from_json(j.at("classifier"));
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CorruptPayload, std::string("pipeline payload: ") + e.what());
    }
}

FittedPipeline fit_pipeline(const PipelineConfig& config, const data::FeatureMatrix& X_train,
                            const data::LabelVector& y_train, std::uint64_t seed) {
    if (y_train.size() != X_train.n_samples()) throw Error(ErrorCode::LengthMismatch, "labels and rows differ in length");
    FittedPipeline p;
    p.optimizer = config.optimizer.kind;
    data::FeatureMatrix Z = X_train;
    if (config.standardize) {
        p.scaler = data::standardize_fit(X_train);
        Z = data::standardize_apply(*p.scaler, X_train);
    }
    const auto& opt = config.optimizer;
    switch (opt.kind) {
        case OptimizerKind::None: break;
        case OptimizerKind::PCA:
            p.pca = opt.pca_components ? reduce::pca_fit(Z, *opt.pca_components) : reduce::pca_fit_variance(Z, opt.pca_variance);
            Z = reduce::pca_transform(*p.pca, Z);
            break;
        case OptimizerKind::LDA:
            p.lda = reduce::lda_fit(Z, y_train, opt.lda_shrinkage);
            Z = reduce::lda_transform(*p.lda, Z);
            break;
        case OptimizerKind::BFO: {
            reduce::BfoConfig bfo = opt.bfo;
            bfo.seed = derive_seed(seed, kBfo);
            const auto objective = reduce::wrapper_fitness(Z, y_train, opt.bfo_learner.with_seed(derive_seed(seed, kClassifier)),
                                                           opt.bfo_folds, derive_seed(seed, kWrapperFolds));
            p.mask = reduce::bfo_select(Z.n_features(), objective, bfo);
            Z = Z.select_columns(p.mask->indices());
            break;
        }
    }
    p.classifier = learn::fit(config.classifier.with_seed(derive_seed(seed, kClassifier)), Z, y_train);
    return p;
}

}  // namespace strokeml::pipeline
