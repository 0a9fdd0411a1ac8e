#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "strokeml/data/dataset.hpp"

namespace strokeml::learn {

enum class LearnerKind { SVC, RF, GNB, DT, XGB, KNN, LR };

std::string_view to_string(LearnerKind kind);
/// Case-insensitive; throws Error(InvalidConfig) for unknown names.
LearnerKind parse_learner_kind(std::string_view name);
/// SVC, RF, GNB, DT, XGB, KNN, LR.
const std::array<LearnerKind, 7>& all_learner_kinds();

using Hyperparams = std::map<std::string, std::string>;

enum class SvcKernel { Rbf, Linear };

struct SvcParams {
    SvcKernel kernel = SvcKernel::Rbf;
    double C = 1.0;
    /// Unset means 1 / (d * var(X)) over all training entries.
    std::optional<double> gamma;
    double tol = 1e-3;
    /// SMO iteration cap per binary problem, in units of its sample count.
    std::size_t max_passes = 1000;
};

struct KnnParams {
    std::size_t k = 5;
};

struct TreeParams {
    /// 0 means unlimited.
    std::size_t max_depth = 0;
    std::size_t min_samples_leaf = 1;
    double min_impurity_decrease = 0.0;
};

struct MaxFeatures {
    enum class Rule { Sqrt, Log2, All, Count } rule = Rule::Sqrt;
    std::size_t count = 0;

    std::size_t resolve(std::size_t n_features) const;
};

struct RfParams {
    std::size_t n_trees = 100;
    MaxFeatures max_features;
    bool bootstrap = true;
};

struct XgbParams {
    std::size_t n_rounds = 100;
    double learning_rate = 0.3;
    std::size_t max_depth = 6;
    double lambda = 1.0;
    double gamma = 0.0;
};

struct LrParams {
    double l2 = 1e-4;
    std::size_t max_iter = 500;
    double tol = 1e-6;
};

struct GnbParams {
    /// Added variance, as a fraction of the largest per-feature variance.
    double var_smoothing = 1e-9;
};

using LearnerParams = std::variant<SvcParams, RfParams, GnbParams, TreeParams, XgbParams, KnnParams, LrParams>;

/// A validated learner choice. Unknown keys and out-of-range values are
/// rejected at construction.
class LearnerSpec {
public:
    LearnerSpec() : params_(GnbParams{}) {}

    static LearnerSpec make(LearnerKind kind, const Hyperparams& hyperparams = {}, std::uint64_t seed = 0);

    LearnerKind kind() const noexcept { return kind_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const LearnerParams& params() const noexcept { return params_; }
    LearnerSpec with_seed(std::uint64_t seed) const;

    /// Every parameter, defaults included, in canonical text form.
    Hyperparams materialized() const;

    template <typename P>
    const P& get() const {
        return std::get<P>(params_);
    }

    bool operator==(const LearnerSpec& other) const { return kind_ == other.kind_ && seed_ == other.seed_ && materialized() == other.materialized(); }

private:
    LearnerKind kind_ = LearnerKind::GNB;
    std::uint64_t seed_ = 0;
    LearnerParams params_;
};

void to_json(nlohmann::json& j, const LearnerSpec& s);
void from_json(const nlohmann::json& j, LearnerSpec& s);

namespace detail {
class Model;
}

/// A fitted classifier of any kind. Immutable and cheap to copy.
///
/// Score columns follow `classes()`, the label ids seen during training in
/// ascending order. predict() is the argmax of predict_scores(), with the
/// lowest class winning exact ties.
class TrainedClassifier {
public:
    TrainedClassifier() = default;
    TrainedClassifier(LearnerKind kind, std::vector<int> classes, std::vector<std::string> class_names,
                      std::size_t n_features, std::shared_ptr<const detail::Model> model);

    LearnerKind kind() const noexcept { return kind_; }
    const std::vector<int>& classes() const noexcept { return classes_; }
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    std::size_t n_features() const noexcept { return n_features_; }

    data::LabelVector predict(const data::FeatureMatrix& X) const;
    data::RowMatrix predict_scores(const data::FeatureMatrix& X) const;

    const detail::Model& model() const { return *model_; }
    template <typename M>
    const M* as() const {
        return dynamic_cast<const M*>(model_.get());
    }

    nlohmann::json to_json() const;
    static TrainedClassifier from_json(const nlohmann::json& j);

private:
    void check_width(const data::FeatureMatrix& X) const;

    LearnerKind kind_ = LearnerKind::GNB;
    std::vector<int> classes_;
    std::vector<std::string> class_names_;
    std::size_t n_features_ = 0;
    std::shared_ptr<const detail::Model> model_;
};

/// Needs n >= 2 rows (a single-class training set yields a constant predictor).
TrainedClassifier fit(const LearnerSpec& spec, const data::FeatureMatrix& X_train, const data::LabelVector& y);

}  // namespace strokeml::learn
