#include "strokeml/reduce/lda.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "strokeml/error.hpp"
#include "strokeml/io/codec.hpp"
#include "strokeml/reduce/pca.hpp"

namespace strokeml::reduce {

using data::RowMatrix;

LdaModel lda_fit(const data::FeatureMatrix& X_train, const data::LabelVector& y, double shrinkage) {
    if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "LDA shrinkage must lie in [0, 1]");
    }
    if (y.size() != X_train.n_samples()) throw Error(ErrorCode::LengthMismatch, "labels and rows differ in length");

    const auto X = X_train.as_eigen();
    const Eigen::Index d = X.cols();
    const auto counts = y.counts();

    LdaModel model;
    model.shrinkage = shrinkage;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) continue;
        if (counts[c] < 2) {
            throw Error(ErrorCode::InvalidArgument, "LDA needs at least 2 samples of class '" + y.class_names[c] + "'");
        }
        model.classes.push_back(static_cast<int>(c));
    }
    const std::size_t n_cls = model.classes.size();
    if (n_cls < 2) throw Error(ErrorCode::InvalidArgument, "LDA needs at least 2 classes");

    const Eigen::RowVectorXd mean = X.colwise().mean();
    model.mean.assign(mean.data(), mean.data() + d);

    std::vector<int> row_of_class(counts.size(), -1);
    for (std::size_t k = 0; k < n_cls; ++k) row_of_class[static_cast<std::size_t>(model.classes[k])] = static_cast<int>(k);
    model.class_means = RowMatrix::Zero(static_cast<Eigen::Index>(n_cls), d);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        model.class_means.row(row_of_class[static_cast<std::size_t>(y.values[static_cast<std::size_t>(i)])]) += X.row(i);
    }
    for (std::size_t k = 0; k < n_cls; ++k) {
        model.class_means.row(static_cast<Eigen::Index>(k)) /= static_cast<double>(counts[static_cast<std::size_t>(model.classes[k])]);
    }

    RowMatrix within_centered(X.rows(), d);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        within_centered.row(i) = X.row(i) - model.class_means.row(row_of_class[static_cast<std::size_t>(y.values[static_cast<std::size_t>(i)])]);
    }
    Eigen::MatrixXd sw = within_centered.transpose() * within_centered;

    // S_b = B B^T with B's columns sqrt(n_c) (mu_c - mu).
    Eigen::MatrixXd between(d, static_cast<Eigen::Index>(n_cls));
    for (std::size_t k = 0; k < n_cls; ++k) {
        const double w = std::sqrt(static_cast<double>(counts[static_cast<std::size_t>(model.classes[k])]));
        between.col(static_cast<Eigen::Index>(k)) = w * (model.class_means.row(static_cast<Eigen::Index>(k)) - mean).transpose();
    }

    const double trace = sw.trace();
    if (shrinkage == 0.0) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(sw);
        const auto diag = ldlt.vectorD();
        const double top = diag.cwiseAbs().maxCoeff();
        if (ldlt.info() != Eigen::Success || !(top > 0.0) || diag.minCoeff() <= 1e-12 * top) {
            throw Error(ErrorCode::SingularScatter,
                        "within-class scatter is singular; raise the LDA shrinkage above 0");
        }
    } else {
        const double reg = trace > 0.0 ? shrinkage * trace / static_cast<double>(d) : shrinkage;
        sw.diagonal().array() += reg;
    }

    // Whiten with S_w' = L L^T; the discriminants are L^{-T} u for the leading
    // left singular vectors u of L^{-1} B.
    Eigen::LLT<Eigen::MatrixXd> llt(sw);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::SingularScatter, "within-class scatter is not positive definite; raise the LDA shrinkage");
    }
    const Eigen::MatrixXd whitened = llt.matrixL().solve(between);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(whitened, Eigen::ComputeThinU);
    const Eigen::Index m = std::min<Eigen::Index>(static_cast<Eigen::Index>(n_cls) - 1, d);
    const Eigen::MatrixXd u = svd.matrixU().leftCols(m);
    const Eigen::MatrixXd v = llt.matrixU().solve(u);  // d x m

    model.projection = v.transpose();
    detail::canonicalize_signs(model.projection);
    for (Eigen::Index k = 0; k < m; ++k) model.eigenvalues.push_back(svd.singularValues()(k) * svd.singularValues()(k));
    return model;
}

data::FeatureMatrix lda_transform(const LdaModel& model, const data::FeatureMatrix& X) {
    if (X.n_features() != model.n_features()) {
        throw Error(ErrorCode::DimensionMismatch, "LDA model expects " + std::to_string(model.n_features()) +
                                                      " features, input has " + std::to_string(X.n_features()));
    }
    const Eigen::Map<const Eigen::RowVectorXd> mean(model.mean.data(), static_cast<Eigen::Index>(model.mean.size()));
    const RowMatrix projected = (X.as_eigen().rowwise() - mean) * model.projection.transpose();
    return data::FeatureMatrix::from_eigen(projected, X.sample_ids());
}

void to_json(nlohmann::json& j, const LdaModel& m) {
    j = {{"mean", io::vector_to_json(m.mean)},
         {"projection", io::matrix_to_json(m.projection)},
         {"class_means", io::matrix_to_json(m.class_means)},
         {"classes", m.classes},
         {"eigenvalues", io::vector_to_json(m.eigenvalues)},
         {"shrinkage", m.shrinkage}};
}

void from_json(const nlohmann::json& j, LdaModel& m) {
    m.mean = io::vector_from_json(j.at("mean"));
    m.projection = io::matrix_from_json(j.at("projection"));
    m.class_means = io::matrix_from_json(j.at("class_means"));
    m.classes = j.at("classes").get<std::vector<int>>();
    m.eigenvalues = io::vector_from_json(j.at("eigenvalues"));
    m.shrinkage = j.at("shrinkage").get<double>();
    if (static_cast<std::size_t>(m.projection.cols()) != m.mean.size()) {
        throw Error(ErrorCode::CorruptPayload, "LDA payload shapes are inconsistent");
    }
}

}  // namespace strokeml::reduce
