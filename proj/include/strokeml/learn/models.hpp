#pragma once

// Kind-specific fitted state. Learners see labels as local indices
// 0..n_classes-1 into TrainedClassifier::classes().

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

#include "strokeml/data/dataset.hpp"
#include "strokeml/learn/learner.hpp"

namespace strokeml::learn::detail {

class Model {
public:
    virtual ~Model() = default;
    virtual std::size_t n_classes() const = 0;
    /// Writes one finite score per class into `out`.
    virtual void scores(std::span<const double> x, std::span<double> out) const = 0;
    virtual nlohmann::json payload() const = 0;
    /// False when the fitted state cannot score rows of width `d`.
    virtual bool accepts_width(std::size_t d) const = 0;
};

class ConstantModel final : public Model {
public:
    std::size_t n_classes() const override { return 1; }
    void scores(std::span<const double>, std::span<double> out) const override { out[0] = 1.0; }
    nlohmann::json payload() const override { return nlohmann::json::object(); }
    bool accepts_width(std::size_t) const override { return true; }
};

// ---------------------------------------------------------------- GNB

class GaussianNbModel final : public Model {
public:
    std::vector<double> log_prior;   // per class
    data::RowMatrix means;           // K x d
    data::RowMatrix variances;       // K x d, smoothing included
    double epsilon = 0.0;            // smoothing that was added

    static GaussianNbModel fit(const data::FeatureMatrix& X, std::span<const int> y, std::size_t n_classes,
                               const GnbParams& p);
    /// Unnormalized log joint log p(c) + log p(x | c).
    void joint_log_likelihood(std::span<const double> x, std::span<double> out) const;

    std::size_t n_classes() const override { return log_prior.size(); }
    void scores(std::span<const double> x, std::span<double> out) const override;
    nlohmann::json payload() const override;
    bool accepts_width(std::size_t d) const override;
    static GaussianNbModel from_payload(const nlohmann::json& j);

private:
    data::RowMatrix inv_variances_;
    std::vector<double> log_norm_;  // log p(c) - 0.5 sum log(2 pi var)
    void prepare();
};

// ---------------------------------------------------------------- KNN

class KnnModel final : public Model {
public:
    data::RowMatrix train;
    std::vector<int> labels;
    std::size_t k = 5;
    std::size_t classes = 0;

    static KnnModel fit(const data::FeatureMatrix& X, std::span<const int> y, std::size_t n_classes, const KnnParams& p);

    /// Training rows within the k-th smallest distance (ties at the boundary included).
    std::vector<std::size_t> neighbors(std::span<const double> x) const;

    std::size_t n_classes() const override { return classes; }
    void scores(std::span<const double> x, std::span<double> out) const override;
    nlohmann::json payload() const override;
    bool accepts_width(std::size_t d) const override;
    static KnnModel from_payload(const nlohmann::json& j);
};

// ---------------------------------------------------------------- CART

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int depth = 0;
    std::size_t n_samples = 0;
    double impurity = 0.0;
    std::vector<double> value;  // class fractions at this node
};

class DecisionTreeModel final : public Model {
public:
    std::vector<TreeNode> nodes;
    std::size_t classes = 0;

    /// `rows` may repeat (bootstrap). `max_features` < d samples features per node from `rng_seed`.
    static DecisionTreeModel fit(const data::FeatureMatrix& X, std::span<const int> y, std::size_t n_classes,
                                 std::span<const std::size_t> rows, const TreeParams& p, std::size_t max_features,
                                 std::uint64_t rng_seed);

    const TreeNode& leaf_for(std::span<const double> x) const;
    std::size_t depth() const;
    std::size_t n_leaves() const;

    std::size_t n_classes() const override { return classes; }
    void scores(std::span<const double> x, std::span<double> out) const override;
    nlohmann::json payload() const override;
    bool accepts_width(std::size_t d) const override;
    static DecisionTreeModel from_payload(const nlohmann::json& j);
};

class RandomForestModel final : public Model {
public:
    std::vector<DecisionTreeModel> trees;
    std::size_t classes = 0;

    static RandomForestModel fit(const data::FeatureMatrix& X, std::span<const int> y, std::size_t n_classes,
                                 const RfParams& p, std::uint64_t seed);

    /// Class index each tree votes for.
    std::vector<int> votes(std::span<const double> x) const;

    std::size_t n_classes() const override { return classes; }
    /// Fraction of trees voting for each class.
    void scores(std::span<const double> x, std::span<double> out) const override;
    nlohmann::json payload() const override;
    bool accepts_width(std::size_t d) const override;
    static RandomForestModel from_payload(const nlohmann::json& j);
};

// ---------------------------------------------------------------- XGB

struct RegressionNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;  // learning rate already applied
};

struct RegressionTree {
    std::vector<RegressionNode> nodes;
    double predict(std::span<const double> x) const;
};

class GradientBoostingModel final : public Model {
public:
    std::size_t classes = 0;
    /// trees[round * classes + k] adds to class k's logit.
    std::vector<RegressionTree> trees;
    /// Mean softmax cross-entropy before the first round and after every round.
    std::vector<double> loss_history;

    static GradientBoostingModel fit(const data::FeatureMatrix& X, std::span<const int> y, std::size_t n_classes,
                                     const XgbParams& p);

    void logits(std::span<const double> x, std::span<double> out) const;

    std::size_t n_classes() const override { return classes; }
    void scores(std::span<const double> x, std::span<double> out) const override;
    nlohmann::json payload() const override;
    bool accepts_width(std::size_t d) const override;
    static GradientBoostingModel from_payload(const nlohmann::json& j);
};

// ---------------------------------------------------------------- LR

class LogisticRegressionModel final : public Model {
public:
    data::RowMatrix weights;  // K x d
    std::vector<double> bias;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
    std::vector<double> loss_history;

    static LogisticRegressionModel fit(const data::FeatureMatrix& X, std::span<const int> y, std::size_t n_classes,
                                       const LrParams& p);

    std::size_t n_classes() const override { return bias.size(); }
    void scores(std::span<const double> x, std::span<double> out) const override;
    nlohmann::json payload() const override;
    bool accepts_width(std::size_t d) const override;
    static LogisticRegressionModel from_payload(const nlohmann::json& j);
};

// ---------------------------------------------------------------- SVC

/// One one-vs-one binary machine: class `positive` (+1) against `negative` (-1).
struct BinarySvm {
    int positive = 0;
    int negative = 0;
    std::vector<std::size_t> support;  // rows of SvcModel::support_vectors
    std::vector<double> coef;          // alpha_i * y_i
    double rho = 0.0;
    // Solver diagnostics.
    std::size_t iterations = 0;
    bool converged = false;
    double kkt_violation = 0.0;  // max over I_up of -yG minus min over I_low of -yG
    double alpha_y_sum = 0.0;    // sum_i alpha_i y_i over the full problem
    double alpha_min = 0.0;
    double alpha_max = 0.0;
};

class SvcModel final : public Model {
public:
    SvcKernel kernel = SvcKernel::Rbf;
    double gamma = 1.0;
    double C = 1.0;
    std::size_t classes = 0;
    data::RowMatrix support_vectors;
    std::vector<BinarySvm> machines;

    static SvcModel fit(const data::FeatureMatrix& X, std::span<const int> y, std::size_t n_classes,
                        const SvcParams& p);

    double kernel_value(std::span<const double> a, std::span<const double> b) const;
    /// Decision value of each machine, positive favouring `positive`.
    std::vector<double> decision_values(std::span<const double> x) const;

    std::size_t n_classes() const override { return classes; }
    /// Votes plus a summed-decision tie-break below one vote, normalized to sum 1.
    void scores(std::span<const double> x, std::span<double> out) const override;
    nlohmann::json payload() const override;
    bool accepts_width(std::size_t d) const override;
    static SvcModel from_payload(const nlohmann::json& j);
};

}  // namespace strokeml::learn::detail
