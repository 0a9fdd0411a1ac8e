#pragma once

#include <vector>

#include "json.hpp"

#include "strokeml/data/dataset.hpp"

namespace strokeml::data {

/// Per-column z-score with population variance (divide by n). Columns with
/// zero variance have scale 0 and always map to 0.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> scale;

    std::size_t n_features() const noexcept { return mean.size(); }
    bool operator==(const Scaler&) const = default;
};

Scaler standardize_fit(const FeatureMatrix& X_train);
FeatureMatrix standardize_apply(const Scaler& scaler, const FeatureMatrix& X);

void to_json(nlohmann::json& j, const Scaler& s);
void from_json(const nlohmann::json& j, Scaler& s);

}  // namespace strokeml::data
