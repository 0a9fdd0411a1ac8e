#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "strokeml/error.hpp"
#include "strokeml/io/codec.hpp"
#include "strokeml/learn/models.hpp"

namespace strokeml::learn::detail {
namespace {

void softmax(std::span<double> v) {
    const double top = *std::max_element(v.begin(), v.end());
    double total = 0.0;
    for (double& x : v) {
        x = std::exp(x - top);
        total += x;
    }
    for (double& x : v) x /= total;
}

double mean_cross_entropy(const data::RowMatrix& logits, std::span<const int> y) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double top = logits.row(i).maxCoeff();
        const double lse = top + std::log((logits.row(i).array() - top).exp().sum());
        total += lse - logits(i, y[i]);
    }
    return total / static_cast<double>(logits.rows());
}

// Second-order regression tree grown level by level with exact greedy splits.
class RegressionTreeBuilder {
public:
    RegressionTreeBuilder(const data::FeatureMatrix& X, const std::vector<std::vector<std::size_t>>& sorted,
                          const XgbParams& p)
        : X_(X), sorted_(sorted), p_(p) {}

    RegressionTree build(std::span<const double> g, std::span<const double> h) {
        const std::size_t n = X_.n_samples();
        RegressionTree tree;
        tree.nodes.emplace_back();
        std::vector<int> node_of(n, 0);
        std::vector<Stats> stats(1);
        for (std::size_t i = 0; i < n; ++i) {
            stats[0].G += g[i];
            stats[0].H += h[i];
        }
        std::vector<int> frontier{0};

        for (std::size_t depth = 0; depth < p_.max_depth && !frontier.empty(); ++depth) {
            const std::size_t nn = tree.nodes.size();
            std::vector<Split> best(nn);
            std::vector<char> active(nn, 0);
            for (int id : frontier) active[id] = 1;
            std::vector<double> GL(nn), HL(nn), last(nn);
            std::vector<char> seen(nn);

            for (std::size_t f = 0; f < X_.n_features(); ++f) {
                std::fill(GL.begin(), GL.end(), 0.0);
                std::fill(HL.begin(), HL.end(), 0.0);
                std::fill(seen.begin(), seen.end(), 0);
                for (std::size_t r : sorted_[f]) {
                    const int id = node_of[r];
                    if (id < 0 || !active[id]) continue;
                    const double x = X_(r, f);
                    if (seen[id] && x > last[id]) {
                        const Stats& s = stats[id];
                        const double gain = split_gain(GL[id], HL[id], s.G - GL[id], s.H - HL[id], s.G, s.H);
                        if (gain > best[id].gain) {
                            double t = last[id] + (x - last[id]) / 2.0;
                            if (!(t < x)) t = last[id];
                            best[id] = {static_cast<int>(f), t, gain};
                        }
                    }
                    GL[id] += g[r];
                    HL[id] += h[r];
                    last[id] = x;
                    seen[id] = 1;
                }
            }

            std::vector<int> next;
            for (int id : frontier) {
                if (best[id].feature < 0) continue;
                const int l = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                stats.resize(tree.nodes.size());
                tree.nodes[id].feature = best[id].feature;
                tree.nodes[id].threshold = best[id].threshold;
                tree.nodes[id].left = l;
                tree.nodes[id].right = l + 1;
                next.push_back(l);
                next.push_back(l + 1);
            }
            for (std::size_t r = 0; r < n; ++r) {
                const int id = node_of[r];
                if (id < 0) continue;
                const auto& node = tree.nodes[id];
                if (node.feature < 0) continue;
                const int child = X_(r, node.feature) <= node.threshold ? node.left : node.right;
                node_of[r] = child;
                stats[child].G += g[r];
                stats[child].H += h[r];
            }
            frontier = std::move(next);
        }

        for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
            auto& node = tree.nodes[id];
            if (node.feature < 0) node.weight = -p_.learning_rate * stats[id].G / (stats[id].H + p_.lambda);
        }
        return tree;
    }

private:
    struct Stats {
        double G = 0.0;
        double H = 0.0;
    };
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double gain = 0.0;
    };

    double split_gain(double gl, double hl, double gr, double hr, double g, double h) const {
        const double lam = p_.lambda;
        if (hl + lam <= 0.0 || hr + lam <= 0.0 || h + lam <= 0.0) return -std::numeric_limits<double>::infinity();
        return 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - g * g / (h + lam)) - p_.gamma;
    }

    const data::FeatureMatrix& X_;
    const std::vector<std::vector<std::size_t>>& sorted_;
    XgbParams p_;
};

}  // namespace

double RegressionTree::predict(std::span<const double> x) const {
    const RegressionNode* node = &nodes.front();
    while (node->feature >= 0) node = &nodes[x[node->feature] <= node->threshold ? node->left : node->right];
    return node->weight;
}

GradientBoostingModel GradientBoostingModel::fit(const data::FeatureMatrix& X, std::span<const int> y,
                                                 std::size_t n_classes, const XgbParams& p) {
    const std::size_t n = X.n_samples();
    const std::size_t d = X.n_features();
    GradientBoostingModel m;
    m.classes = n_classes;

    std::vector<std::vector<std::size_t>> sorted(d, std::vector<std::size_t>(n));
    for (std::size_t f = 0; f < d; ++f) {
        std::iota(sorted[f].begin(), sorted[f].end(), 0);
        std::stable_sort(sorted[f].begin(), sorted[f].end(),
                         [&](std::size_t a, std::size_t b) { return X(a, f) < X(b, f); });
    }

    data::RowMatrix logits = data::RowMatrix::Zero(n, n_classes);
    data::RowMatrix prob(n, n_classes);
    std::vector<double> g(n), h(n);
    RegressionTreeBuilder builder(X, sorted, p);
    m.loss_history.push_back(mean_cross_entropy(logits, y));

    for (std::size_t round = 0; round < p.n_rounds; ++round) {
        prob = logits;
        for (std::size_t i = 0; i < n; ++i) softmax({prob.row(i).data(), n_classes});
        for (std::size_t k = 0; k < n_classes; ++k) {
            // 2p(1-p) bounds the softmax Hessian's row sums, so each class step
            // minimizes an upper bound of the loss.
            for (std::size_t i = 0; i < n; ++i) {
                const double pk = prob(i, k);
                g[i] = pk - (static_cast<std::size_t>(y[i]) == k ? 1.0 : 0.0);
                h[i] = std::max(2.0 * pk * (1.0 - pk), 1e-16);
            }
            m.trees.push_back(builder.build(g, h));
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n_classes; ++k) {
                logits(i, k) += m.trees[round * n_classes + k].predict(X.row(i));
            }
        }
        m.loss_history.push_back(mean_cross_entropy(logits, y));
    }
    return m;
}

void GradientBoostingModel::logits(std::span<const double> x, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t t = 0; t < trees.size(); ++t) out[t % classes] += trees[t].predict(x);
}

void GradientBoostingModel::scores(std::span<const double> x, std::span<double> out) const {
    logits(x, out);
    softmax(out);
}

nlohmann::json GradientBoostingModel::payload() const {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& tree : trees) {
        std::vector<int> feature, left, right;
        std::vector<double> threshold, weight;
        for (const auto& node : tree.nodes) {
            feature.push_back(node.feature);
            left.push_back(node.left);
            right.push_back(node.right);
            threshold.push_back(node.threshold);
            weight.push_back(node.weight);
        }
        t.push_back({{"feature", feature},
                     {"left", left},
                     {"right", right},
                     {"threshold", io::vector_to_json(threshold)},
                     {"weight", io::vector_to_json(weight)}});
    }
    return {{"classes", classes}, {"trees", t}, {"loss_history", io::vector_to_json(loss_history)}};
}

GradientBoostingModel GradientBoostingModel::from_payload(const nlohmann::json& j) {
    GradientBoostingModel m;
    m.classes = j.at("classes").get<std::size_t>();
    m.loss_history = io::vector_from_json(j.at("loss_history"));
    for (const auto& t : j.at("trees")) {
        const auto feature = t.at("feature").get<std::vector<int>>();
        const auto left = t.at("left").get<std::vector<int>>();
        const auto right = t.at("right").get<std::vector<int>>();
        const auto threshold = io::vector_from_json(t.at("threshold"));
        const auto weight = io::vector_from_json(t.at("weight"));
        const std::size_t n = feature.size();
        if (n == 0 || left.size() != n || right.size() != n || threshold.size() != n || weight.size() != n) {
            throw Error(ErrorCode::CorruptPayload, "boosted tree payload arrays disagree in length");
        }
        RegressionTree tree;
        for (std::size_t i = 0; i < n; ++i) {
            if (feature[i] >= 0 && (left[i] <= static_cast<int>(i) || right[i] <= static_cast<int>(i) ||
                                    left[i] >= static_cast<int>(n) || right[i] >= static_cast<int>(n))) {
                throw Error(ErrorCode::CorruptPayload, "boosted tree payload has an invalid child index");
            }
            tree.nodes.push_back({feature[i], threshold[i], left[i], right[i], weight[i]});
        }
        m.trees.push_back(std::move(tree));
    }
    if (m.classes == 0 || m.trees.size() % m.classes != 0) {
        throw Error(ErrorCode::CorruptPayload, "boosted model has a partial round");
    }
    return m;
}

bool GradientBoostingModel::accepts_width(std::size_t d) const {
    for (const auto& t : trees) {
        for (const auto& n : t.nodes) {
            if (n.feature >= 0 && static_cast<std::size_t>(n.feature) >= d) return false;
        }
    }
    return true;
}

}  // namespace strokeml::learn::detail
