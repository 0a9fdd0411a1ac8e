#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "json.hpp"

#include "strokeml/data/dataset.hpp"

namespace strokeml::reduce {

/// Principal components of centered training data.
///
/// `components` rows are orthonormal directions sorted by non-increasing
/// `explained_variance` (population variance of the projected training data).
/// The largest-magnitude entry of every row is positive.
struct PcaModel {
    std::vector<double> mean;
    data::RowMatrix components;  // m x d
    std::vector<double> explained_variance;
    /// Sum of per-column variances of the training data.
    double total_variance = 0.0;

    std::size_t n_components() const noexcept { return static_cast<std::size_t>(components.rows()); }
    std::size_t n_features() const noexcept { return mean.size(); }
};

/// Requires 1 <= m <= min(n - 1, d). Uses the d x d covariance when d <= n and
/// the n x n Gram matrix otherwise. Zero-variance directions are completed
/// with an orthonormal basis and carry explained variance 0.
PcaModel pca_fit(const data::FeatureMatrix& X_train, std::size_t m);

/// Keeps the smallest number of components whose cumulative explained
/// variance reaches `variance_ratio` of the total.
PcaModel pca_fit_variance(const data::FeatureMatrix& X_train, double variance_ratio = 0.95);

data::FeatureMatrix pca_transform(const PcaModel& model, const data::FeatureMatrix& X);

/// mean + components^T y, row by row.
data::FeatureMatrix pca_reconstruct(const PcaModel& model, const data::FeatureMatrix& Y);

void to_json(nlohmann::json& j, const PcaModel& m);
void from_json(const nlohmann::json& j, PcaModel& m);

namespace detail {
/// Flips each row so its largest-magnitude entry (first on ties) is positive.
void canonicalize_signs(data::RowMatrix& rows);
/// Appends unit rows orthogonal to the existing ones until there are `target` rows.
void complete_orthonormal(data::RowMatrix& rows, std::size_t target);
}  // namespace detail

}  // namespace strokeml::reduce
