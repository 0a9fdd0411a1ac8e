#include <algorithm>

#include "strokeml/error.hpp"
#include "strokeml/learn/learner.hpp"
#include "strokeml/learn/models.hpp"

namespace strokeml::learn {

TrainedClassifier::TrainedClassifier(LearnerKind kind, std::vector<int> classes, std::vector<std::string> class_names,
                                     std::size_t n_features, std::shared_ptr<const detail::Model> model)
    : kind_(kind), classes_(std::move(classes)), class_names_(std::move(class_names)), n_features_(n_features),
      model_(std::move(model)) {}

void TrainedClassifier::check_width(const data::FeatureMatrix& X) const {
    if (!model_) throw Error(ErrorCode::InvalidArgument, "classifier has not been fitted");
    if (X.n_features() != n_features_) {
        throw Error(ErrorCode::DimensionMismatch, "classifier expects " + std::to_string(n_features_) +
                                                      " features, got " + std::to_string(X.n_features()));
    }
}

data::RowMatrix TrainedClassifier::predict_scores(const data::FeatureMatrix& X) const {
    check_width(X);
    const std::size_t K = classes_.size();
    data::RowMatrix out(static_cast<Eigen::Index>(X.n_samples()), static_cast<Eigen::Index>(K));
    for (std::size_t i = 0; i < X.n_samples(); ++i) {
        model_->scores(X.row(i), {out.row(static_cast<Eigen::Index>(i)).data(), K});
    }
    return out;
}

data::LabelVector TrainedClassifier::predict(const data::FeatureMatrix& X) const {
    const data::RowMatrix s = predict_scores(X);
    data::LabelVector out;
    out.class_names = class_names_;
    out.values.reserve(X.n_samples());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        const double* row = s.row(i).data();
        const auto best = std::max_element(row, row + s.cols()) - row;  // first maximum wins ties
        out.values.push_back(classes_[static_cast<std::size_t>(best)]);
    }
    return out;
}

TrainedClassifier fit(const LearnerSpec& spec, const data::FeatureMatrix& X, const data::LabelVector& y) {
    if (X.empty() || X.n_features() == 0) throw Error(ErrorCode::EmptyMatrix, "cannot fit a classifier on an empty matrix");
    if (y.size() != X.n_samples()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(X.n_samples()) + " rows but " + std::to_string(y.size()) +
                                                   " labels");
    }
    std::vector<int> classes;
    for (std::size_t c = 0; c < y.n_classes(); ++c) {
        if (std::find(y.values.begin(), y.values.end(), static_cast<int>(c)) != y.values.end()) {
            classes.push_back(static_cast<int>(c));
        }
    }
    std::vector<int> local(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        local[i] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), y.values[i]) - classes.begin());
    }
    const std::size_t K = classes.size();
    std::shared_ptr<const detail::Model> model;
    if (K == 1) {
        model = std::make_shared<detail::ConstantModel>();
    } else {
        switch (spec.kind()) {
            case LearnerKind::SVC:
                model = std::make_shared<detail::SvcModel>(detail::SvcModel::fit(X, local, K, spec.get<SvcParams>()));
                break;
            case LearnerKind::RF:
                model = std::make_shared<detail::RandomForestModel>(
                    detail::RandomForestModel::fit(X, local, K, spec.get<RfParams>(), spec.seed()));
                break;
            case LearnerKind::GNB:
                model = std::make_shared<detail::GaussianNbModel>(
                    detail::GaussianNbModel::fit(X, local, K, spec.get<GnbParams>()));
                break;
            case LearnerKind::DT: {
                std::vector<std::size_t> rows(X.n_samples());
                for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
                model = std::make_shared<detail::DecisionTreeModel>(detail::DecisionTreeModel::fit(
                    X, local, K, rows, spec.get<TreeParams>(), X.n_features(), spec.seed()));
                break;
            }
            case LearnerKind::XGB:
                model = std::make_shared<detail::GradientBoostingModel>(
                    detail::GradientBoostingModel::fit(X, local, K, spec.get<XgbParams>()));
                break;
            case LearnerKind::KNN:
                model = std::make_shared<detail::KnnModel>(detail::KnnModel::fit(X, local, K, spec.get<KnnParams>()));
                break;
            case LearnerKind::LR:
                model = std::make_shared<detail::LogisticRegressionModel>(
                    detail::LogisticRegressionModel::fit(X, local, K, spec.get<LrParams>()));
                break;
        }
    }
    return TrainedClassifier(spec.kind(), std::move(classes), y.class_names, X.n_features(), std::move(model));
}

nlohmann::json TrainedClassifier::to_json() const {
    if (!model_) throw Error(ErrorCode::InvalidArgument, "classifier has not been fitted");
    return {{"kind", std::string(learn::to_string(kind_))},
            {"classes", classes_},
            {"class_names", class_names_},
            {"n_features", n_features_},
            {"constant", classes_.size() == 1},
            {"model", model_->payload()}};
}

TrainedClassifier TrainedClassifier::from_json(const nlohmann::json& j) {
    try {
        const LearnerKind kind = parse_learner_kind(j.at("kind").get<std::string>());
        auto classes = j.at("classes").get<std::vector<int>>();
        auto names = j.at("class_names").get<std::vector<std::string>>();
        const auto d = j.at("n_features").get<std::size_t>();
        const auto& p = j.at("model");
        if (classes.empty() || !std::is_sorted(classes.begin(), classes.end()) || classes.front() < 0 ||
            static_cast<std::size_t>(classes.back()) >= names.size()) {
            throw Error(ErrorCode::CorruptPayload, "classifier class list is invalid");
        }
        std::shared_ptr<const detail::Model> model;
        if (j.value("constant", false)) {
            model = std::make_shared<detail::ConstantModel>();
        } else {
            switch (kind) {
                case LearnerKind::SVC: model = std::make_shared<detail::SvcModel>(detail::SvcModel::from_payload(p)); break;
                case LearnerKind::RF:
                    model = std::make_shared<detail::RandomForestModel>(detail::RandomForestModel::from_payload(p));
                    break;
                case LearnerKind::GNB:
                    model = std::make_shared<detail::GaussianNbModel>(detail::GaussianNbModel::from_payload(p));
                    break;
                case LearnerKind::DT:
                    model = std::make_shared<detail::DecisionTreeModel>(detail::DecisionTreeModel::from_payload(p));
                    break;
                case LearnerKind::XGB:
                    model = std::make_shared<detail::GradientBoostingModel>(detail::GradientBoostingModel::from_payload(p));
                    break;
                case LearnerKind::KNN: model = std::make_shared<detail::KnnModel>(detail::KnnModel::from_payload(p)); break;
                case LearnerKind::LR:
                    model = std::make_shared<detail::LogisticRegressionModel>(
                        detail::LogisticRegressionModel::from_payload(p));
                    break;
            }
        }
        if (model->n_classes() != classes.size()) {
            throw Error(ErrorCode::CorruptPayload, "classifier payload disagrees with its class list");
        }
        if (!model->accepts_width(d)) {
            throw Error(ErrorCode::CorruptPayload, "classifier payload disagrees with its feature count");
        }
        return TrainedClassifier(kind, std::move(classes), std::move(names), d, std::move(model));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CorruptPayload, std::string("classifier payload: ") + e.what());
    }
}

}  // namespace strokeml::learn
