#include <algorithm>
#include <cmath>
#include <numbers>

#include "strokeml/io/codec.hpp"
#include "strokeml/learn/models.hpp"
#include "strokeml/simd/kernels.hpp"

namespace strokeml::learn::detail {

GaussianNbModel GaussianNbModel::fit(const data::FeatureMatrix& X, std::span<const int> y, std::size_t n_classes,
                                     const GnbParams& p) {
    const std::size_t n = X.n_samples();
    const std::size_t d = X.n_features();
    GaussianNbModel m;
    m.means = data::RowMatrix::Zero(n_classes, d);
    m.variances = data::RowMatrix::Zero(n_classes, d);
    std::vector<double> counts(n_classes, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<Eigen::Index>(y[i]);
        counts[y[i]] += 1.0;
        for (std::size_t j = 0; j < d; ++j) m.means(c, j) += X(i, j);
    }
    for (std::size_t c = 0; c < n_classes; ++c) m.means.row(c) /= counts[c];
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<Eigen::Index>(y[i]);
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = X(i, j) - m.means(c, j);
            m.variances(c, j) += diff * diff;
        }
    }
    for (std::size_t c = 0; c < n_classes; ++c) m.variances.row(c) /= counts[c];

    // Smoothing is relative to the widest feature over the whole training set.
    double widest = 0.0;
    const auto all = X.as_eigen();
    for (std::size_t j = 0; j < d; ++j) {
        const double mu = all.col(j).mean();
        widest = std::max(widest, (all.col(j).array() - mu).square().mean());
    }
    m.epsilon = p.var_smoothing * (widest > 0.0 ? widest : 1.0);
    if (m.epsilon <= 0.0) m.epsilon = 1e-300;
    m.variances.array() += m.epsilon;

    m.log_prior.resize(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) m.log_prior[c] = std::log(counts[c] / static_cast<double>(n));
    m.prepare();
    return m;
}

void GaussianNbModel::prepare() {
    inv_variances_ = variances.cwiseInverse();
    log_norm_.resize(log_prior.size());
    for (std::size_t c = 0; c < log_prior.size(); ++c) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < variances.cols(); ++j) s += std::log(2.0 * std::numbers::pi * variances(c, j));
        log_norm_[c] = log_prior[c] - 0.5 * s;
    }
}

void GaussianNbModel::joint_log_likelihood(std::span<const double> x, std::span<double> out) const {
    const auto d = static_cast<std::size_t>(means.cols());
    const auto& k = simd::active();
    for (std::size_t c = 0; c < log_prior.size(); ++c) {
        const double q = k.weighted_squared_distance(x.data(), means.row(c).data(), inv_variances_.row(c).data(), d);
        out[c] = log_norm_[c] - 0.5 * q;
    }
}

void GaussianNbModel::scores(std::span<const double> x, std::span<double> out) const {
    joint_log_likelihood(x, out);
    const double top = *std::max_element(out.begin(), out.end());
    double total = 0.0;
    for (double& v : out) {
        v = std::exp(v - top);
        total += v;
    }
    for (double& v : out) v /= total;
}

nlohmann::json GaussianNbModel::payload() const {
    return {{"log_prior", io::vector_to_json(log_prior)},
            {"means", io::matrix_to_json(means)},
            {"variances", io::matrix_to_json(variances)},
            {"epsilon", epsilon}};
}

GaussianNbModel GaussianNbModel::from_payload(const nlohmann::json& j) {
    GaussianNbModel m;
    m.log_prior = io::vector_from_json(j.at("log_prior"));
    m.means = io::matrix_from_json(j.at("means"));
    m.variances = io::matrix_from_json(j.at("variances"));
    m.epsilon = j.at("epsilon").get<double>();
    m.prepare();
    return m;
}

bool GaussianNbModel::accepts_width(std::size_t d) const { return static_cast<std::size_t>(means.cols()) == d; }

}  // namespace strokeml::learn::detail
