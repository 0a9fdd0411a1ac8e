#pragma once

// Generators and independent oracles shared by the unit tests and the
// acceptance binary. Nothing here calls into the library's numerics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "strokeml/data/csv.hpp"
#include "strokeml/data/dataset.hpp"
#include "strokeml/rng.hpp"

namespace strokeml::fixtures {

struct Labeled {
    data::FeatureMatrix X;
    data::LabelVector y;
};

inline std::vector<std::string> class_names(std::size_t c) {
    if (c == 3) return data::stroke_class_names();
    std::vector<std::string> names;
    for (std::size_t i = 0; i < c; ++i) names.push_back("c" + std::to_string(i));
    return names;
}

/// Isotropic Gaussian blobs. Class c is centred at `separation` * e_(c mod d)
/// (class 0 at the origin), so every pair of centres is `separation` or
/// separation * sqrt(2) apart.
inline Labeled blobs(std::size_t n_per_class, std::size_t n_classes, std::size_t d, double separation,
                     std::uint64_t seed, double sd = 1.0) {
    Rng rng(seed);
    std::vector<double> values;
    std::vector<int> labels;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n_per_class * n_classes; ++i) {
        const auto c = static_cast<int>(i % n_classes);
        for (std::size_t j = 0; j < d; ++j) {
            double centre = 0.0;
            if (c > 0 && j == static_cast<std::size_t>(c - 1) % d) centre = separation;
            values.push_back(rng.normal(centre, sd));
        }
        labels.push_back(c);
        ids.push_back("s" + std::to_string(i));
    }
    const std::size_t n = labels.size();
    return {data::FeatureMatrix(n, d, std::move(values), std::move(ids)),
            data::make_labels(std::move(labels), class_names(n_classes))};
}

inline data::FeatureMatrix uniform_matrix(std::size_t n, std::size_t d, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n * d);
    for (double& x : v) x = rng.uniform(lo, hi);
    return data::FeatureMatrix(n, d, std::move(v));
}

inline data::FeatureMatrix gaussian_matrix(std::size_t n, std::size_t d, Rng& rng) {
    std::vector<double> v(n * d);
    for (double& x : v) x = rng.normal();
    return data::FeatureMatrix(n, d, std::move(v));
}

inline void write_csv(const std::filesystem::path& path, const Labeled& ds) { data::write_features(path, ds.X, ds.y); }

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("strokeml-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// ------------------------------------------------------------------ oracles

using Matrix = std::vector<std::vector<double>>;

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Eigenvalues come
/// back descending, eigenvectors as columns of `vectors`.
struct JacobiResult {
    std::vector<double> values;
    Matrix vectors;
};

inline JacobiResult jacobi_eigen(Matrix a) {
    const std::size_t n = a.size();
    Matrix v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
    JacobiResult out;
    out.vectors.assign(n, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        out.values.push_back(a[order[j]][order[j]]);
        for (std::size_t i = 0; i < n; ++i) out.vectors[i][j] = v[i][order[j]];
    }
    return out;
}

/// Population covariance of the columns of X.
inline Matrix covariance(const data::FeatureMatrix& X) {
    const std::size_t n = X.n_samples(), d = X.n_features();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += X(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    Matrix c(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = 0; q < d; ++q) c[p][q] += (X(i, p) - mean[p]) * (X(i, q) - mean[q]);
    for (auto& row : c)
        for (double& x : row) x /= static_cast<double>(n);
    return c;
}

/// Precision/recall/F1 tallied directly from label pairs, one class at a time.
struct TallyMetrics {
    double accuracy = 0.0;
    std::vector<double> precision, recall, f1;
    std::vector<std::size_t> support;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    double weighted_precision = 0.0, weighted_recall = 0.0;
};

inline TallyMetrics tally(const std::vector<int>& truth, const std::vector<int>& pred, std::size_t c) {
    TallyMetrics t;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == pred[i];
    t.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
    for (std::size_t k = 0; k < c; ++k) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const bool is_t = truth[i] == static_cast<int>(k);
            const bool is_p = pred[i] == static_cast<int>(k);
            if (is_t && is_p) ++tp;
            else if (is_p) ++fp;
            else if (is_t) ++fn;
        }
        const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        t.precision.push_back(p);
        t.recall.push_back(r);
        t.f1.push_back(p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r));
        t.support.push_back(tp + fn);
    }
    for (std::size_t k = 0; k < c; ++k) {
        t.macro_precision += t.precision[k] / static_cast<double>(c);
        t.macro_recall += t.recall[k] / static_cast<double>(c);
        const double w = static_cast<double>(t.support[k]) / static_cast<double>(truth.size());
        t.weighted_precision += w * t.precision[k];
        t.weighted_recall += w * t.recall[k];
    }
    const double p = t.macro_precision, r = t.macro_recall;
    t.macro_f1 = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    return t;
}

/// Probability that a random positive outscores a random negative, ties half.
inline double mann_whitney_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!positive[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (positive[j]) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

inline double angle_between(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double c = std::clamp(std::abs(dot) / std::sqrt(na * nb), 0.0, 1.0);
    return std::acos(c);
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(Matrix a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

/// 1-NN accuracy with the test set scored against the training set.
inline double one_nn_accuracy(const std::vector<std::vector<double>>& train, const std::vector<int>& ytrain,
                              const std::vector<std::vector<double>>& test, const std::vector<int>& ytest) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        double best = INFINITY;
        int label = -1;
        for (std::size_t j = 0; j < train.size(); ++j) {
            double d = 0.0;
            for (std::size_t k = 0; k < test[i].size(); ++k) d += (test[i][k] - train[j][k]) * (test[i][k] - train[j][k]);
            if (d < best) {
                best = d;
                label = ytrain[j];
            }
        }
        correct += label == ytest[i];
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

inline std::vector<std::vector<double>> rows_of(const data::FeatureMatrix& X) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < X.n_samples(); ++i) out.emplace_back(X.row(i).begin(), X.row(i).end());
    return out;
}

}  // namespace strokeml::fixtures
