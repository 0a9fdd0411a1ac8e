#include "strokeml/reduce/pca.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "strokeml/error.hpp"
#include "strokeml/io/codec.hpp"

namespace strokeml::reduce {

using data::RowMatrix;

namespace detail {

void canonicalize_signs(RowMatrix& rows) {
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index c = 0; c < rows.cols(); ++c) {
            const double a = std::abs(rows(r, c));
            // Ties are resolved toward the lower index, but only past round-off.
            if (a > best * (1.0 + 1e-12) + 1e-300) {
                best = a;
                arg = c;
            }
        }
        if (rows(r, arg) < 0.0) rows.row(r) *= -1.0;
    }
}

void complete_orthonormal(RowMatrix& rows, std::size_t target) {
    const Eigen::Index d = rows.cols();
    Eigen::Index have = rows.rows();
    if (static_cast<Eigen::Index>(target) <= have) return;
    RowMatrix out(static_cast<Eigen::Index>(target), d);
    out.topRows(have) = rows;
    for (Eigen::Index j = 0; j < d && have < static_cast<Eigen::Index>(target); ++j) {
        Eigen::RowVectorXd v = Eigen::RowVectorXd::Unit(d, j);
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index r = 0; r < have; ++r) v -= v.dot(out.row(r)) * out.row(r);
        }
        const double norm = v.norm();
        if (norm > 1e-6) out.row(have++) = v / norm;
    }
    rows = std::move(out);
}

}  // namespace detail

namespace {

void check_fit_input(const data::FeatureMatrix& X, std::size_t m) {
    const std::size_t n = X.n_samples();
    const std::size_t d = X.n_features();
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "PCA needs at least 2 training samples");
    const std::size_t max_m = std::min(n - 1, d);
    if (m < 1 || m > max_m) {
        throw Error(ErrorCode::InvalidArgument, "PCA component count " + std::to_string(m) + " outside [1, " +
                                                    std::to_string(max_m) + "]");
    }
}

}  // namespace

PcaModel pca_fit(const data::FeatureMatrix& X_train, std::size_t m) {
    check_fit_input(X_train, m);
    const auto X = X_train.as_eigen();
    const auto n = X.rows();
    const auto d = X.cols();
    const double inv_n = 1.0 / static_cast<double>(n);

    const Eigen::RowVectorXd mean = X.colwise().mean();
    const RowMatrix centered = X.rowwise() - mean;

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + d);
    model.total_variance = centered.squaredNorm() * inv_n;

    RowMatrix components;
    std::vector<double> variances;
    if (d <= n) {
        const Eigen::MatrixXd cov = (centered.transpose() * centered) * inv_n;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        components.resize(static_cast<Eigen::Index>(m), d);
        for (std::size_t k = 0; k < m; ++k) {
            const Eigen::Index src = d - 1 - static_cast<Eigen::Index>(k);  // eigenvalues ascend
            components.row(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(src).transpose();
            variances.push_back(std::max(0.0, es.eigenvalues()(src)));
        }
    } else {
        // Gram route: if G u = mu u with G = Xc Xc^T, then Xc^T u / sqrt(mu) is a
        // unit eigenvector of the covariance with eigenvalue mu / n.
        const Eigen::MatrixXd gram = centered * centered.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        const double top = std::max(0.0, es.eigenvalues()(n - 1));
        std::vector<Eigen::RowVectorXd> rows;
        for (std::size_t k = 0; k < m; ++k) {
            const Eigen::Index src = n - 1 - static_cast<Eigen::Index>(k);
            const double mu = es.eigenvalues()(src);
            if (!(mu > 1e-12 * top) || mu <= 0.0) break;
            Eigen::RowVectorXd v = (centered.transpose() * es.eigenvectors().col(src)).transpose() / std::sqrt(mu);
            v.normalize();
            rows.push_back(std::move(v));
            variances.push_back(mu * inv_n);
        }
        components.resize(static_cast<Eigen::Index>(rows.size()), d);
        for (std::size_t k = 0; k < rows.size(); ++k) components.row(static_cast<Eigen::Index>(k)) = rows[k];
        detail::complete_orthonormal(components, m);
        variances.resize(m, 0.0);
    }
    detail::canonicalize_signs(components);
    model.components = std::move(components);
    model.explained_variance = std::move(variances);
    return model;
}

PcaModel pca_fit_variance(const data::FeatureMatrix& X_train, double variance_ratio) {
    if (!(variance_ratio > 0.0 && variance_ratio <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "variance ratio must lie in (0, 1]");
    }
    if (X_train.n_samples() < 2) throw Error(ErrorCode::InvalidArgument, "PCA needs at least 2 training samples");
    const std::size_t max_m = std::min(X_train.n_samples() - 1, X_train.n_features());
    PcaModel full = pca_fit(X_train, max_m);
    std::size_t keep = 1;
    if (full.total_variance > 0.0) {
        double acc = 0.0;
        keep = max_m;
        for (std::size_t k = 0; k < max_m; ++k) {
            acc += full.explained_variance[k];
            if (acc >= variance_ratio * full.total_variance * (1.0 - 1e-12)) {
                keep = k + 1;
                break;
            }
        }
    }
    full.components.conservativeResize(static_cast<Eigen::Index>(keep), Eigen::NoChange);
    full.explained_variance.resize(keep);
    return full;
}

data::FeatureMatrix pca_transform(const PcaModel& model, const data::FeatureMatrix& X) {
    if (X.n_features() != model.n_features()) {
        throw Error(ErrorCode::DimensionMismatch, "PCA model expects " + std::to_string(model.n_features()) +
                                                      " features, input has " + std::to_string(X.n_features()));
    }
    const Eigen::Map<const Eigen::RowVectorXd> mean(model.mean.data(), static_cast<Eigen::Index>(model.mean.size()));
    const RowMatrix projected = (X.as_eigen().rowwise() - mean) * model.components.transpose();
    return data::FeatureMatrix::from_eigen(projected, X.sample_ids());
}

data::FeatureMatrix pca_reconstruct(const PcaModel& model, const data::FeatureMatrix& Y) {
    if (Y.n_features() != model.n_components()) {
        throw Error(ErrorCode::DimensionMismatch, "reconstruction input width differs from component count");
    }
    const Eigen::Map<const Eigen::RowVectorXd> mean(model.mean.data(), static_cast<Eigen::Index>(model.mean.size()));
    const RowMatrix back = (Y.as_eigen() * model.components).rowwise() + mean;
    return data::FeatureMatrix::from_eigen(back, Y.sample_ids());
}

void to_json(nlohmann::json& j, const PcaModel& m) {
    j = {{"mean", io::vector_to_json(m.mean)},
         {"components", io::matrix_to_json(m.components)},
         {"explained_variance", io::vector_to_json(m.explained_variance)},
         {"total_variance", m.total_variance}};
}

void from_json(const nlohmann::json& j, PcaModel& m) {
    m.mean = io::vector_from_json(j.at("mean"));
    m.components = io::matrix_from_json(j.at("components"));
    m.explained_variance = io::vector_from_json(j.at("explained_variance"));
    m.total_variance = j.at("total_variance").get<double>();
    if (static_cast<std::size_t>(m.components.cols()) != m.mean.size() ||
        static_cast<std::size_t>(m.components.rows()) != m.explained_variance.size()) {
        throw Error(ErrorCode::CorruptPayload, "PCA payload shapes are inconsistent");
    }
}

}  // namespace strokeml::reduce
