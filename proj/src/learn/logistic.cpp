#include <algorithm>
#include <cmath>

#include "strokeml/error.hpp"
#include "strokeml/io/codec.hpp"
#include "strokeml/learn/models.hpp"
#include "strokeml/simd/kernels.hpp"

namespace strokeml::learn::detail {
namespace {

using Matrix = Eigen::MatrixXd;

struct Objective {
    const Eigen::Map<const data::RowMatrix>& X;
    const Matrix& Y;  // one-hot, n x K
    double l2;

    // Parameters are packed as [W (K x d) | b (K)] in one K x (d+1) matrix.
    double value(const Matrix& theta, Matrix* grad) const {
        const Eigen::Index d = X.cols();
        const double n = static_cast<double>(X.rows());
        Matrix Z = X * theta.leftCols(d).transpose();
        Z.rowwise() += theta.col(d).transpose();
        double loss = 0.0;
        for (Eigen::Index i = 0; i < Z.rows(); ++i) {
            const double top = Z.row(i).maxCoeff();
            Z.row(i) = (Z.row(i).array() - top).exp().matrix();
            const double total = Z.row(i).sum();
            Z.row(i) /= total;
            loss -= std::log(std::max((Z.row(i).array() * Y.row(i).array()).sum(), 1e-300));
        }
        const auto W = theta.leftCols(d);
        loss = loss / n + 0.5 * l2 * W.squaredNorm();
        if (grad) {
            const Matrix R = (Z - Y) / n;
            grad->resize(theta.rows(), theta.cols());
            grad->leftCols(d) = R.transpose() * X + l2 * W;
            grad->col(d) = R.colwise().sum().transpose();
        }
        return loss;
    }
};

}  // namespace

LogisticRegressionModel LogisticRegressionModel::fit(const data::FeatureMatrix& X, std::span<const int> y,
                                                     std::size_t n_classes, const LrParams& p) {
    const auto Xe = X.as_eigen();
    const auto K = static_cast<Eigen::Index>(n_classes);
    const Eigen::Index d = Xe.cols();
    Matrix Y = Matrix::Zero(Xe.rows(), K);
    for (Eigen::Index i = 0; i < Xe.rows(); ++i) Y(i, y[i]) = 1.0;
    const Objective obj{Xe, Y, p.l2};

    LogisticRegressionModel m;
    Matrix theta = Matrix::Zero(K, d + 1);
    Matrix grad, next_grad;
    double loss = obj.value(theta, &grad);
    m.loss_history.push_back(loss);
    double step = 1.0;
    Matrix prev_theta, prev_grad;

    // Gradient descent with a Barzilai-Borwein trial step and Armijo backtracking.
    for (m.iterations = 0; m.iterations < p.max_iter; ++m.iterations) {
        m.gradient_norm = grad.cwiseAbs().maxCoeff();
        if (m.gradient_norm <= p.tol) {
            m.converged = true;
            break;
        }
        if (prev_theta.size() != 0) {
            const Matrix s = theta - prev_theta;
            const Matrix dg = grad - prev_grad;
            const double sy = (s.array() * dg.array()).sum();
            if (sy > 0.0) step = std::clamp(s.squaredNorm() / sy, 1e-10, 1e10);
        }
        const double g2 = grad.squaredNorm();
        Matrix candidate;
        double candidate_loss = loss;
        bool accepted = false;
        for (int halvings = 0; halvings < 60; ++halvings) {
            candidate = theta - step * grad;
            candidate_loss = obj.value(candidate, nullptr);
            if (candidate_loss <= loss - 1e-4 * step * g2) {
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if (!accepted) break;
        prev_theta = std::move(theta);
        prev_grad = grad;
        theta = std::move(candidate);
        loss = obj.value(theta, &grad);
        m.loss_history.push_back(loss);
    }
    m.gradient_norm = grad.cwiseAbs().maxCoeff();
    m.converged = m.converged || m.gradient_norm <= p.tol;

    m.weights = theta.leftCols(d);
    m.bias.assign(theta.col(d).data(), theta.col(d).data() + K);
    return m;
}

void LogisticRegressionModel::scores(std::span<const double> x, std::span<double> out) const {
    const auto d = static_cast<std::size_t>(weights.cols());
    const auto& k = simd::active();
    for (std::size_t c = 0; c < bias.size(); ++c) out[c] = bias[c] + k.dot(weights.row(c).data(), x.data(), d);
    const double top = *std::max_element(out.begin(), out.end());
    double total = 0.0;
    for (double& v : out) {
        v = std::exp(v - top);
        total += v;
    }
    for (double& v : out) v /= total;
}

nlohmann::json LogisticRegressionModel::payload() const {
    return {{"weights", io::matrix_to_json(weights)},
            {"bias", io::vector_to_json(bias)},
            {"iterations", iterations},
            {"gradient_norm", gradient_norm},
            {"converged", converged}};
}

LogisticRegressionModel LogisticRegressionModel::from_payload(const nlohmann::json& j) {
    LogisticRegressionModel m;
    m.weights = io::matrix_from_json(j.at("weights"));
    m.bias = io::vector_from_json(j.at("bias"));
    m.iterations = j.at("iterations").get<std::size_t>();
    m.gradient_norm = j.at("gradient_norm").get<double>();
    m.converged = j.at("converged").get<bool>();
    if (m.bias.size() != static_cast<std::size_t>(m.weights.rows())) {
        throw Error(ErrorCode::CorruptPayload, "logistic payload shapes disagree");
    }
    return m;
}

bool LogisticRegressionModel::accepts_width(std::size_t d) const { return static_cast<std::size_t>(weights.cols()) == d; }

}  // namespace strokeml::learn::detail
