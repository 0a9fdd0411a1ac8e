#include "strokeml/data/scaler.hpp"

#include <cmath>

#include "strokeml/error.hpp"
#include "strokeml/io/codec.hpp"

namespace strokeml::data {

Scaler standardize_fit(const FeatureMatrix& X_train) {
    if (X_train.n_samples() < 2) throw Error(ErrorCode::InvalidArgument, "standardize_fit needs at least 2 samples");
    const std::size_t n = X_train.n_samples();
    const std::size_t d = X_train.n_features();
    Scaler s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = X_train.row(i);
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
    }
    for (double& m : s.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = X_train.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double c = r[j] - s.mean[j];
            s.scale[j] += c * c;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        const double sd = std::sqrt(s.scale[j] / static_cast<double>(n));
        // Treat round-off-level spread around a constant column as zero variance.
        s.scale[j] = sd > 1e-12 * std::max(1.0, std::abs(s.mean[j])) ? sd : 0.0;
    }
    return s;
}

FeatureMatrix standardize_apply(const Scaler& scaler, const FeatureMatrix& X) {
    if (X.n_features() != scaler.n_features()) {
        throw Error(ErrorCode::DimensionMismatch, "scaler fitted on " + std::to_string(scaler.n_features()) +
                                                      " features, input has " + std::to_string(X.n_features()));
    }
    const std::size_t d = X.n_features();
    std::vector<double> out(X.values().begin(), X.values().end());
    for (std::size_t i = 0; i < X.n_samples(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double& v = out[i * d + j];
            v = scaler.scale[j] > 0.0 ? (v - scaler.mean[j]) / scaler.scale[j] : 0.0;
        }
    }
    return FeatureMatrix(X.n_samples(), d, std::move(out), X.sample_ids());
}

void to_json(nlohmann::json& j, const Scaler& s) {
    j = {{"mean", io::vector_to_json(s.mean)}, {"scale", io::vector_to_json(s.scale)}};
}

void from_json(const nlohmann::json& j, Scaler& s) {
    s.mean = io::vector_from_json(j.at("mean"));
    s.scale = io::vector_from_json(j.at("scale"));
    if (s.mean.size() != s.scale.size()) throw Error(ErrorCode::CorruptPayload, "scaler vectors differ in length");
}

}  // namespace strokeml::data
