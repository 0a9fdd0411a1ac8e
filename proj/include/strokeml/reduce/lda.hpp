#pragma once

#include <vector>

#include "json.hpp"

#include "strokeml/data/dataset.hpp"

namespace strokeml::reduce {

/// Fisher discriminant projection.
///
/// The within-class scatter is regularized as S_w + shrinkage * (tr(S_w)/d) * I
/// before solving S_b v = l S_w' v. Rows of `projection` are the top
/// min(c - 1, d) generalized eigenvectors, scaled so v^T S_w' v = 1, with
/// the largest-magnitude entry positive.
struct LdaModel {
    std::vector<double> mean;
    data::RowMatrix projection;   // m x d
    data::RowMatrix class_means;  // c x d, one row per class present in training
    std::vector<int> classes;     // class id of each class_means row
    std::vector<double> eigenvalues;  // Fisher ratio of each discriminant, descending
    double shrinkage = 0.0;

    std::size_t n_components() const noexcept { return static_cast<std::size_t>(projection.rows()); }
    std::size_t n_features() const noexcept { return mean.size(); }
};

/// Relative shrinkage used when none is configured.
inline constexpr double kDefaultLdaShrinkage = 1e-3;

/// Needs >= 2 classes with >= 2 samples each and shrinkage in [0, 1].
/// Throws SingularScatter when shrinkage is 0 and S_w is numerically singular.
LdaModel lda_fit(const data::FeatureMatrix& X_train, const data::LabelVector& y,
                 double shrinkage = kDefaultLdaShrinkage);

data::FeatureMatrix lda_transform(const LdaModel& model, const data::FeatureMatrix& X);

void to_json(nlohmann::json& j, const LdaModel& m);
void from_json(const nlohmann::json& j, LdaModel& m);

}  // namespace strokeml::reduce
