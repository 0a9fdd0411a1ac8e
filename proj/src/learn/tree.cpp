#include <algorithm>
#include <numeric>

#include "strokeml/error.hpp"
#include "strokeml/io/codec.hpp"
#include "strokeml/learn/models.hpp"
#include "strokeml/rng.hpp"

namespace strokeml::learn::detail {
namespace {

double gini(std::span<const double> counts, double total) {
    if (total <= 0.0) return 0.0;
    double s = 0.0;
    for (double c : counts) s += c * c;
    return 1.0 - s / (total * total);
}

struct Candidate {
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const data::FeatureMatrix& X, std::span<const int> y, std::size_t n_classes, const TreeParams& p,
                std::size_t max_features, std::uint64_t seed, std::size_t n_root)
        : X_(X), y_(y), K_(n_classes), p_(p), max_features_(max_features), rng_(seed),
          n_root_(static_cast<double>(n_root)) {}

    std::vector<TreeNode> build(std::vector<std::size_t> rows) {
        grow(std::move(rows), 0);
        return std::move(nodes_);
    }

private:
    int grow(std::vector<std::size_t> rows, int depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        std::vector<double> counts(K_, 0.0);
        for (std::size_t r : rows) counts[y_[r]] += 1.0;
        const double n = static_cast<double>(rows.size());
        TreeNode node;
        node.depth = depth;
        node.n_samples = rows.size();
        node.impurity = gini(counts, n);
        node.value.resize(K_);
        for (std::size_t c = 0; c < K_; ++c) node.value[c] = counts[c] / n;

        const bool depth_ok = p_.max_depth == 0 || static_cast<std::size_t>(depth) < p_.max_depth;
        Candidate best;
        if (depth_ok && node.impurity > 0.0 && rows.size() >= 2 * p_.min_samples_leaf) {
            best = best_split(rows, counts, node.impurity);
        }
        if (best.feature < 0 || best.decrease + 1e-12 < p_.min_impurity_decrease) {
            nodes_[id] = std::move(node);
            return id;
        }

        std::vector<std::size_t> left, right;
        for (std::size_t r : rows) {
            (X_(r, best.feature) <= best.threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        node.feature = best.feature;
        node.threshold = best.threshold;
        nodes_[id] = std::move(node);
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    std::vector<std::size_t> features() {
        const std::size_t d = X_.n_features();
        std::vector<std::size_t> f(d);
        std::iota(f.begin(), f.end(), 0);
        if (max_features_ >= d) return f;
        for (std::size_t i = 0; i < max_features_; ++i) {
            const auto j = i + static_cast<std::size_t>(rng_.index(d - i));
            std::swap(f[i], f[j]);
        }
        f.resize(max_features_);
        std::sort(f.begin(), f.end());
        return f;
    }

    Candidate best_split(const std::vector<std::size_t>& rows, const std::vector<double>& counts, double impurity) {
        Candidate best;
        const std::size_t n = rows.size();
        const double nt = static_cast<double>(n);
        std::vector<std::pair<double, int>> column(n);
        std::vector<double> left(K_), right(K_);
        for (std::size_t f : features()) {
            for (std::size_t i = 0; i < n; ++i) column[i] = {X_(rows[i], f), y_[rows[i]]};
            std::sort(column.begin(), column.end());
            std::fill(left.begin(), left.end(), 0.0);
            right = counts;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left[column[i].second] += 1.0;
                right[column[i].second] -= 1.0;
                const double a = column[i].first;
                const double b = column[i + 1].first;
                if (!(a < b)) continue;
                const std::size_t nl = i + 1;
                if (nl < p_.min_samples_leaf || n - nl < p_.min_samples_leaf) continue;
                const double wl = static_cast<double>(nl);
                const double wr = nt - wl;
                const double child = (wl * gini(left, wl) + wr * gini(right, wr)) / nt;
                const double decrease = nt / n_root_ * (impurity - child);
                if (best.feature < 0 || decrease > best.decrease) {
                    double t = a + (b - a) / 2.0;
                    if (!(t < b)) t = a;
                    best = {static_cast<int>(f), t, decrease};
                }
            }
        }
        return best;
    }

    const data::FeatureMatrix& X_;
    std::span<const int> y_;
    std::size_t K_;
    TreeParams p_;
    std::size_t max_features_;
    Rng rng_;
    double n_root_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

DecisionTreeModel DecisionTreeModel::fit(const data::FeatureMatrix& X, std::span<const int> y, std::size_t n_classes,
                                         std::span<const std::size_t> rows, const TreeParams& p,
                                         std::size_t max_features, std::uint64_t rng_seed) {
    DecisionTreeModel m;
    m.classes = n_classes;
    TreeBuilder builder(X, y, n_classes, p, max_features, rng_seed, rows.size());
    m.nodes = builder.build({rows.begin(), rows.end()});
    return m;
}

const TreeNode& DecisionTreeModel::leaf_for(std::span<const double> x) const {
    const TreeNode* node = &nodes.front();
    while (node->feature >= 0) {
        node = &nodes[x[node->feature] <= node->threshold ? node->left : node->right];
    }
    return *node;
}

std::size_t DecisionTreeModel::depth() const {
    int d = 0;
    for (const auto& n : nodes) d = std::max(d, n.depth);
    return static_cast<std::size_t>(d);
}

std::size_t DecisionTreeModel::n_leaves() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

void DecisionTreeModel::scores(std::span<const double> x, std::span<double> out) const {
    const auto& v = leaf_for(x).value;
    std::copy(v.begin(), v.end(), out.begin());
}

nlohmann::json DecisionTreeModel::payload() const {
    std::vector<int> feature, left, right, depth;
    std::vector<std::size_t> n_samples;
    std::vector<double> threshold, impurity, value;
    for (const auto& n : nodes) {
        feature.push_back(n.feature);
        left.push_back(n.left);
        right.push_back(n.right);
        depth.push_back(n.depth);
        n_samples.push_back(n.n_samples);
        threshold.push_back(n.threshold);
        impurity.push_back(n.impurity);
        value.insert(value.end(), n.value.begin(), n.value.end());
    }
    return {{"classes", classes},
            {"feature", feature},
            {"left", left},
            {"right", right},
            {"depth", depth},
            {"n_samples", n_samples},
            {"threshold", io::vector_to_json(threshold)},
            {"impurity", io::vector_to_json(impurity)},
            {"value", io::matrix_to_json(nodes.size(), classes, value)}};
}

DecisionTreeModel DecisionTreeModel::from_payload(const nlohmann::json& j) {
    DecisionTreeModel m;
    m.classes = j.at("classes").get<std::size_t>();
    const auto feature = j.at("feature").get<std::vector<int>>();
    const auto left = j.at("left").get<std::vector<int>>();
    const auto right = j.at("right").get<std::vector<int>>();
    const auto depth = j.at("depth").get<std::vector<int>>();
    const auto n_samples = j.at("n_samples").get<std::vector<std::size_t>>();
    const auto threshold = io::vector_from_json(j.at("threshold"));
    const auto impurity = io::vector_from_json(j.at("impurity"));
    const auto value = io::matrix_from_json(j.at("value"));
    const std::size_t n = feature.size();
    if (n == 0 || left.size() != n || right.size() != n || depth.size() != n || n_samples.size() != n ||
        threshold.size() != n || impurity.size() != n || static_cast<std::size_t>(value.rows()) != n ||
        static_cast<std::size_t>(value.cols()) != m.classes) {
        throw Error(ErrorCode::CorruptPayload, "tree payload arrays disagree in length");
    }
    const int count = static_cast<int>(n);
    for (std::size_t i = 0; i < n; ++i) {
        TreeNode node;
        node.feature = feature[i];
        node.left = left[i];
        node.right = right[i];
        if (node.feature >= 0 && (node.left <= static_cast<int>(i) || node.right <= static_cast<int>(i) ||
                                  node.left >= count || node.right >= count)) {
            throw Error(ErrorCode::CorruptPayload, "tree payload has an invalid child index");
        }
        node.depth = depth[i];
        node.n_samples = n_samples[i];
        node.threshold = threshold[i];
        node.impurity = impurity[i];
        node.value.assign(value.row(i).data(), value.row(i).data() + m.classes);
        m.nodes.push_back(std::move(node));
    }
    return m;
}

RandomForestModel RandomForestModel::fit(const data::FeatureMatrix& X, std::span<const int> y, std::size_t n_classes,
                                         const RfParams& p, std::uint64_t seed) {
    RandomForestModel m;
    m.classes = n_classes;
    const std::size_t n = X.n_samples();
    const std::size_t mf = p.max_features.resolve(X.n_features());
    std::vector<std::size_t> rows(n);
    for (std::size_t t = 0; t < p.n_trees; ++t) {
        const std::uint64_t tree_seed = derive_seed(seed, t);
        if (p.bootstrap) {
            Rng draw(tree_seed);
            for (auto& r : rows) r = static_cast<std::size_t>(draw.index(n));
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        m.trees.push_back(DecisionTreeModel::fit(X, y, n_classes, rows, TreeParams{}, mf, derive_seed(tree_seed, 1)));
    }
    return m;
}

std::vector<int> RandomForestModel::votes(std::span<const double> x) const {
    std::vector<int> out;
    out.reserve(trees.size());
    for (const auto& t : trees) {
        const auto& v = t.leaf_for(x).value;
        out.push_back(static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin()));
    }
    return out;
}

void RandomForestModel::scores(std::span<const double> x, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (int v : votes(x)) out[v] += 1.0;
    for (double& s : out) s /= static_cast<double>(trees.size());
}

nlohmann::json RandomForestModel::payload() const {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& tree : trees) t.push_back(tree.payload());
    return {{"classes", classes}, {"trees", t}};
}

RandomForestModel RandomForestModel::from_payload(const nlohmann::json& j) {
    RandomForestModel m;
    m.classes = j.at("classes").get<std::size_t>();
    for (const auto& t : j.at("trees")) m.trees.push_back(DecisionTreeModel::from_payload(t));
    if (m.trees.empty()) throw Error(ErrorCode::CorruptPayload, "forest payload has no trees");
    return m;
}

bool DecisionTreeModel::accepts_width(std::size_t d) const {
    return std::all_of(nodes.begin(), nodes.end(), [d](const TreeNode& n) { return n.feature < 0 || static_cast<std::size_t>(n.feature) < d; });
}

bool RandomForestModel::accepts_width(std::size_t d) const {
    return std::all_of(trees.begin(), trees.end(), [d](const DecisionTreeModel& t) { return t.accepts_width(d); });
}

}  // namespace strokeml::learn::detail
