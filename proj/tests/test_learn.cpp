#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "strokeml/error.hpp"
#include "strokeml/learn/learner.hpp"
#include "strokeml/learn/models.hpp"
#include "support.hpp"

using namespace strokeml;
using namespace strokeml::learn;
using data::FeatureMatrix;

namespace {

LearnerSpec spec(LearnerKind kind, Hyperparams hp = {}, std::uint64_t seed = 0) {
    return LearnerSpec::make(kind, hp, seed);
}

double accuracy(const TrainedClassifier& m, const fixtures::Labeled& ds) {
    const auto pred = m.predict(ds.X);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < ds.y.size(); ++i) ok += pred.values[i] == ds.y.values[i];
    return static_cast<double>(ok) / static_cast<double>(ds.y.size());
}

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::Io;
}

}  // namespace

// ------------------------------------------------------------------ spec

TEST(LearnerSpec, RejectsUnknownAndOutOfRange) {
    EXPECT_EQ(code_of([] { spec(LearnerKind::KNN, {{"neighbours", "3"}}); }), ErrorCode::UnknownHyperparam);
    EXPECT_EQ(code_of([] { spec(LearnerKind::KNN, {{"k", "0"}}); }), ErrorCode::HyperparamOutOfRange);
    EXPECT_EQ(code_of([] { spec(LearnerKind::SVC, {{"C", "-1"}}); }), ErrorCode::HyperparamOutOfRange);
    EXPECT_EQ(code_of([] { spec(LearnerKind::SVC, {{"kernel", "poly"}}); }), ErrorCode::HyperparamOutOfRange);
    EXPECT_EQ(code_of([] { spec(LearnerKind::XGB, {{"learning_rate", "1.5"}}); }), ErrorCode::HyperparamOutOfRange);
    EXPECT_EQ(code_of([] { spec(LearnerKind::RF, {{"bootstrap", "maybe"}}); }), ErrorCode::HyperparamOutOfRange);
    EXPECT_EQ(code_of([] { spec(LearnerKind::LR, {{"max_iter", "2.5"}}); }), ErrorCode::HyperparamOutOfRange);
    EXPECT_EQ(code_of([] { parse_learner_kind("MLP"); }), ErrorCode::InvalidConfig);
}

TEST(LearnerSpec, MaterializedRoundTrip) {
    for (auto kind : all_learner_kinds()) {
        const auto s = spec(kind, {}, 12);
        nlohmann::json j = s;
        EXPECT_EQ(j.get<LearnerSpec>(), s);
        EXPECT_EQ(spec(kind, s.materialized(), 12), s);
    }
    EXPECT_EQ(parse_learner_kind("xgb"), LearnerKind::XGB);
    EXPECT_EQ(spec(LearnerKind::SVC, {{"gamma", "0.5"}}).materialized().at("gamma"), "0.5");
}

TEST(LearnerSpec, MaxFeaturesRules) {
    MaxFeatures m;
    EXPECT_EQ(m.resolve(1280), 35u);
    m.rule = MaxFeatures::Rule::Log2;
    EXPECT_EQ(m.resolve(1024), 10u);
    m.rule = MaxFeatures::Rule::Count;
    m.count = 50;
    EXPECT_EQ(m.resolve(8), 8u);
    m.rule = MaxFeatures::Rule::All;
    EXPECT_EQ(m.resolve(8), 8u);
}

// ------------------------------------------------------------------ degenerate inputs

TEST(Classifier, SingleClassIsConstant) {
    const FeatureMatrix X(3, 2, {1, 2, 3, 4, 5, 6});
    const auto y = data::make_labels({2, 2, 2}, data::stroke_class_names());
    for (auto kind : all_learner_kinds()) {
        const auto m = fit(spec(kind), X, y);
        EXPECT_EQ(m.classes(), std::vector<int>{2});
        const FeatureMatrix probe(1, 2, {-9, 9});
        EXPECT_EQ(m.predict(probe).values, std::vector<int>{2});
        EXPECT_EQ(m.predict_scores(probe)(0, 0), 1.0);
    }
}

TEST(Classifier, InputErrors) {
    const FeatureMatrix X(2, 1, {1, 2});
    EXPECT_EQ(code_of([&] { fit(spec(LearnerKind::GNB), X, data::make_labels({0}, {"a"})); }), ErrorCode::LengthMismatch);
    EXPECT_EQ(code_of([&] { fit(spec(LearnerKind::GNB), FeatureMatrix(), data::make_labels({}, {"a"})); }),
              ErrorCode::EmptyMatrix);
    const auto m = fit(spec(LearnerKind::GNB), X, data::make_labels({0, 1}, {"a", "b"}));
    EXPECT_EQ(code_of([&] { m.predict(FeatureMatrix(1, 2, {1, 2})); }), ErrorCode::DimensionMismatch);
}

TEST(Classifier, ScoreColumnsFollowPresentClasses) {
    // Declared classes 0..2, only 0 and 2 present.
    const FeatureMatrix X(4, 1, {0, 0.1, 5, 5.1});
    const auto y = data::make_labels({0, 0, 2, 2}, data::stroke_class_names());
    for (auto kind : all_learner_kinds()) {
        const auto m = fit(spec(kind, kind == LearnerKind::KNN ? Hyperparams{{"k", "1"}} : Hyperparams{}), X, y);
        EXPECT_EQ(m.classes(), (std::vector<int>{0, 2}));
        EXPECT_EQ(m.predict_scores(X).cols(), 2);
        EXPECT_EQ(m.predict(FeatureMatrix(1, 1, {5.05})).values, std::vector<int>{2}) << to_string(kind);
    }
}

// ------------------------------------------------------------------ GNB

TEST(Gnb, SixPointClosedForm) {
    const FeatureMatrix X(6, 1, {1, 2, 3, 6, 7, 9});
    const auto y = data::make_labels({0, 0, 0, 1, 1, 1}, {"a", "b"});
    const auto m = fit(spec(LearnerKind::GNB, {{"var_smoothing", "0"}}), X, y);
    const auto* g = m.as<detail::GaussianNbModel>();
    ASSERT_NE(g, nullptr);
    // Hand-computed population statistics.
    EXPECT_DOUBLE_EQ(g->means(0, 0), 2.0);
    EXPECT_NEAR(g->variances(0, 0), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(g->means(1, 0), 22.0 / 3.0, 1e-12);
    EXPECT_NEAR(g->variances(1, 0), (1.0 / 3.0) * ((6 - 22.0 / 3) * (6 - 22.0 / 3) + (7 - 22.0 / 3) * (7 - 22.0 / 3) +
                                                   (9 - 22.0 / 3) * (9 - 22.0 / 3)),
                1e-12);

    auto density = [](double x, double mu, double var) {
        return std::exp(-(x - mu) * (x - mu) / (2 * var)) / std::sqrt(2 * std::numbers::pi * var);
    };
    const double probe = 4.2;
    const double p0 = 0.5 * density(probe, g->means(0, 0), g->variances(0, 0));
    const double p1 = 0.5 * density(probe, g->means(1, 0), g->variances(1, 0));
    const auto s = m.predict_scores(FeatureMatrix(1, 1, {probe}));
    EXPECT_NEAR(s(0, 0), p0 / (p0 + p1), 1e-12);
    EXPECT_NEAR(s(0, 1), p1 / (p0 + p1), 1e-12);
}

TEST(Gnb, SymmetricProbeIsEven) {
    const FeatureMatrix X(4, 2, {-2, 1, -2, -1, 2, 1, 2, -1});
    const auto y = data::make_labels({0, 0, 1, 1}, {"a", "b"});
    const auto s = fit(spec(LearnerKind::GNB), X, y).predict_scores(FeatureMatrix(1, 2, {0.0, 0.3}));
    EXPECT_NEAR(s(0, 0), 0.5, 1e-9);
    EXPECT_NEAR(s(0, 1), 0.5, 1e-9);
}

// ------------------------------------------------------------------ KNN

TEST(Knn, ExactMatchWithKOne) {
    Rng rng(1);
    const auto ds = fixtures::blobs(10, 3, 3, 1.0, 2);
    const auto m = fit(spec(LearnerKind::KNN, {{"k", "1"}}), ds.X, ds.y);
    EXPECT_EQ(m.predict(ds.X).values, ds.y.values);
}

TEST(Knn, FivePointBruteForce) {
    const FeatureMatrix X(5, 2, {0, 0, 1, 0, 0, 1, 5, 5, 6, 5});
    const std::vector<int> labels{0, 1, 1, 0, 0};
    const auto y = data::make_labels(labels, {"a", "b"});
    const auto m = fit(spec(LearnerKind::KNN, {{"k", "3"}}), X, y);
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        const double px = rng.uniform(-2, 8), py = rng.uniform(-2, 8);
        std::vector<std::pair<double, int>> d;
        for (std::size_t i = 0; i < 5; ++i) {
            d.push_back({(X(i, 0) - px) * (X(i, 0) - px) + (X(i, 1) - py) * (X(i, 1) - py), labels[i]});
        }
        std::sort(d.begin(), d.end());
        if (d[2].first == d[3].first) continue;
        const int votes1 = (d[0].second == 1) + (d[1].second == 1) + (d[2].second == 1);
        EXPECT_EQ(m.predict(FeatureMatrix(1, 2, {px, py})).values[0], votes1 >= 2 ? 1 : 0);
    }
}

TEST(Knn, KClampedToTrainingSize) {
    const FeatureMatrix X(3, 1, {0, 1, 10});
    const auto y = data::make_labels({0, 0, 1}, {"a", "b"});
    const auto s = fit(spec(LearnerKind::KNN, {{"k", "50"}}), X, y).predict_scores(FeatureMatrix(1, 1, {10}));
    EXPECT_NEAR(s(0, 0), 2.0 / 3.0, 1e-12);
}

// ------------------------------------------------------------------ trees

TEST(Tree, XorIsShattered) {
    const FeatureMatrix X(4, 2, {0, 0, 1, 1, 0, 1, 1, 0});
    const auto y = data::make_labels({0, 0, 1, 1}, {"a", "b"});
    const auto m = fit(spec(LearnerKind::DT), X, y);
    EXPECT_EQ(m.predict(X).values, y.values);
    EXPECT_GE(m.as<detail::DecisionTreeModel>()->depth(), 2u);
}

TEST(Tree, DepthAndLeafLimits) {
    const auto ds = fixtures::blobs(50, 3, 2, 1.0, 4);
    const auto m = fit(spec(LearnerKind::DT, {{"max_depth", "2"}}), ds.X, ds.y);
    EXPECT_LE(m.as<detail::DecisionTreeModel>()->depth(), 2u);
    const auto leafy = fit(spec(LearnerKind::DT, {{"min_samples_leaf", "20"}}), ds.X, ds.y);
    for (const auto& node : leafy.as<detail::DecisionTreeModel>()->nodes) {
        if (node.feature < 0) {
            EXPECT_GE(node.n_samples, 20u);
        }
    }
}

TEST(Forest, VoteFractions) {
    auto leaf_tree = [](std::vector<double> value) {
        detail::DecisionTreeModel t;
        t.classes = 3;
        detail::TreeNode leaf;
        leaf.value = std::move(value);
        t.nodes.push_back(leaf);
        return t;
    };
    detail::RandomForestModel rf;
    rf.classes = 3;
    for (int i = 0; i < 7; ++i) rf.trees.push_back(leaf_tree({0.1, 0.2, 0.7}));
    for (int i = 0; i < 3; ++i) rf.trees.push_back(leaf_tree({0.6, 0.3, 0.1}));
    std::vector<double> out(3);
    const std::vector<double> x{0.0};
    rf.scores(x, out);
    EXPECT_NEAR(out[2], 0.7, 1e-12);
    EXPECT_NEAR(out[0], 0.3, 1e-12);
    EXPECT_EQ(out[1], 0.0);
}

TEST(Forest, SingleFullTreeEqualsDecisionTree) {
    const auto ds = fixtures::blobs(60, 3, 5, 1.5, 9);
    const auto rf = fit(spec(LearnerKind::RF, {{"n_trees", "1"}, {"bootstrap", "false"}, {"max_features", "all"}}, 3),
                        ds.X, ds.y);
    const auto dt = fit(spec(LearnerKind::DT), ds.X, ds.y);
    EXPECT_EQ(rf.as<detail::RandomForestModel>()->trees[0].payload(), dt.as<detail::DecisionTreeModel>()->payload());
    Rng rng(1);
    const auto probe = fixtures::uniform_matrix(500, 5, rng, -3, 5);
    EXPECT_EQ(rf.predict(probe).values, dt.predict(probe).values);
}

TEST(Forest, SeedControlsBootstrap) {
    const auto ds = fixtures::blobs(30, 3, 4, 1.0, 5);
    const auto a = fit(spec(LearnerKind::RF, {{"n_trees", "10"}}, 1), ds.X, ds.y);
    const auto b = fit(spec(LearnerKind::RF, {{"n_trees", "10"}}, 1), ds.X, ds.y);
    const auto c = fit(spec(LearnerKind::RF, {{"n_trees", "10"}}, 2), ds.X, ds.y);
    EXPECT_EQ(a.to_json(), b.to_json());
    EXPECT_NE(a.to_json(), c.to_json());
}

// ------------------------------------------------------------------ boosting

TEST(Boost, LossIsMonotone) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto ds = fixtures::blobs(40, 3, 4, 1.5, seed);
        const auto m = fit(spec(LearnerKind::XGB, {{"n_rounds", "40"}}), ds.X, ds.y);
        const auto& h = m.as<detail::GradientBoostingModel>()->loss_history;
        ASSERT_EQ(h.size(), 41u);
        EXPECT_NEAR(h.front(), std::log(3.0), 1e-12);
        for (std::size_t r = 1; r < h.size(); ++r) EXPECT_LE(h[r], h[r - 1] + 1e-12) << "round " << r;
    }
}

TEST(Boost, GammaPrunesEverything) {
    const auto ds = fixtures::blobs(20, 2, 2, 3.0, 1);
    const auto m = fit(spec(LearnerKind::XGB, {{"n_rounds", "3"}, {"gamma", "1e9"}}), ds.X, ds.y);
    for (const auto& t : m.as<detail::GradientBoostingModel>()->trees) EXPECT_EQ(t.nodes.size(), 1u);
}

// ------------------------------------------------------------------ logistic

TEST(Logistic, RowsSumToOne) {
    Rng rng(2);
    const auto ds = fixtures::blobs(30, 3, 6, 1.0, 3);
    const auto m = fit(spec(LearnerKind::LR), ds.X, ds.y);
    const auto s = m.predict_scores(fixtures::uniform_matrix(200, 6, rng, -50, 50));
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        EXPECT_NEAR(s.row(i).sum(), 1.0, 1e-9);
        EXPECT_GE(s.row(i).minCoeff(), 0.0);
    }
    const auto* lr = m.as<detail::LogisticRegressionModel>();
    EXPECT_TRUE(lr->converged);
    for (std::size_t k = 1; k < lr->loss_history.size(); ++k) EXPECT_LE(lr->loss_history[k], lr->loss_history[k - 1]);
}

// ------------------------------------------------------------------ SVC

namespace {

// Checks every machine's KKT conditions on its training rows:
// alpha = 0 -> y f >= 1 - tol, 0 < alpha < C -> |y f - 1| <= tol, alpha = C -> y f <= 1 + tol.
double worst_kkt(const TrainedClassifier& m, const fixtures::Labeled& ds) {
    const auto* svc = m.as<detail::SvcModel>();
    double worst = 0.0;
    for (std::size_t b = 0; b < svc->machines.size(); ++b) {
        const auto& mach = svc->machines[b];
        for (std::size_t i = 0; i < ds.X.n_samples(); ++i) {
            const int c = ds.y.values[i];
            if (c != mach.positive && c != mach.negative) continue;
            const double yi = c == mach.positive ? 1.0 : -1.0;
            double alpha = 0.0;
            for (std::size_t s = 0; s < mach.support.size(); ++s) {
                const auto sv = svc->support_vectors.row(static_cast<Eigen::Index>(mach.support[s]));
                bool same = true;
                for (std::size_t j = 0; j < ds.X.n_features(); ++j) same = same && sv(j) == ds.X(i, j);
                if (same) alpha = std::abs(mach.coef[s]);
            }
            const double margin = yi * svc->decision_values(ds.X.row(i))[b];
            const double tol_c = 1e-9 * svc->C;
            if (alpha <= tol_c) worst = std::max(worst, 1.0 - margin);
            else if (alpha >= svc->C - tol_c) worst = std::max(worst, margin - 1.0);
            else worst = std::max(worst, std::abs(margin - 1.0));
        }
    }
    return worst;
}

}  // namespace

TEST(Svc, LinearSeparableBlobs) {
    const auto ds = fixtures::blobs(40, 2, 2, 8.0, 6);
    const auto m = fit(spec(LearnerKind::SVC, {{"kernel", "linear"}}), ds.X, ds.y);
    EXPECT_EQ(accuracy(m, ds), 1.0);
    EXPECT_LE(worst_kkt(m, ds), 1e-3);
    const auto& mach = m.as<detail::SvcModel>()->machines[0];
    EXPECT_TRUE(mach.converged);
    EXPECT_NEAR(mach.alpha_y_sum, 0.0, 1e-9);
}

TEST(Svc, RbfKktWithinTolerance) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto ds = fixtures::blobs(40, 3, 3, 2.0, seed);
        const auto m = fit(spec(LearnerKind::SVC, {{"tol", "1e-4"}}), ds.X, ds.y);
        EXPECT_LE(worst_kkt(m, ds), 1e-4);
        for (const auto& mach : m.as<detail::SvcModel>()->machines) {
            EXPECT_LE(mach.kkt_violation, 1e-4);
            EXPECT_GE(mach.alpha_min, 0.0);
            EXPECT_LE(mach.alpha_max, 1.0);
        }
    }
}

// ------------------------------------------------------------------ all kinds

class AllKinds : public ::testing::TestWithParam<LearnerKind> {};

TEST_P(AllKinds, BlobBenchmark) {
    const auto train = fixtures::blobs(100, 3, 4, 6.0, 101);
    const auto test = fixtures::blobs(100, 3, 4, 6.0, 202);
    const auto m = fit(spec(GetParam(), {}, 5), train.X, train.y);
    EXPECT_GE(accuracy(m, test), 0.95);
}

TEST_P(AllKinds, ArgmaxOfScoresIsPrediction) {
    const auto train = fixtures::blobs(50, 3, 4, 3.0, 7);
    const auto m = fit(spec(GetParam(), {}, 5), train.X, train.y);
    Rng rng(8);
    const auto probe = fixtures::uniform_matrix(1000, 4, rng, -4, 8);
    const auto s = m.predict_scores(probe);
    const auto p = m.predict(probe);
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        Eigen::Index arg = 0;
        for (Eigen::Index c = 1; c < s.cols(); ++c)
            if (s(i, c) > s(i, arg)) arg = c;
        EXPECT_EQ(p.values[static_cast<std::size_t>(i)], m.classes()[static_cast<std::size_t>(arg)]);
        EXPECT_TRUE(s.row(i).allFinite());
    }
}

TEST_P(AllKinds, JsonRoundTripPreservesScores) {
    const auto train = fixtures::blobs(30, 3, 3, 2.0, 11);
    const auto m = fit(spec(GetParam(), {}, 5), train.X, train.y);
    const auto back = TrainedClassifier::from_json(nlohmann::json::parse(m.to_json().dump()));
    Rng rng(12);
    const auto probe = fixtures::uniform_matrix(100, 3, rng, -3, 5);
    EXPECT_EQ(back.predict_scores(probe), m.predict_scores(probe));
    EXPECT_EQ(back.to_json(), m.to_json());
}

TEST_P(AllKinds, Deterministic) {
    const auto train = fixtures::blobs(30, 3, 3, 2.0, 13);
    EXPECT_EQ(fit(spec(GetParam(), {}, 5), train.X, train.y).to_json(),
              fit(spec(GetParam(), {}, 5), train.X, train.y).to_json());
}

TEST_P(AllKinds, CorruptPayloadRejected) {
    const auto train = fixtures::blobs(10, 3, 2, 3.0, 1);
    auto j = fit(spec(GetParam()), train.X, train.y).to_json();
    j["n_features"] = 1;
    EXPECT_THROW(TrainedClassifier::from_json(j), Error);
    auto k = fit(spec(GetParam()), train.X, train.y).to_json();
    k.erase("model");
    EXPECT_EQ(code_of([&] { TrainedClassifier::from_json(k); }), ErrorCode::CorruptPayload);
}

INSTANTIATE_TEST_SUITE_P(Learn, AllKinds, ::testing::ValuesIn(all_learner_kinds()),
                         [](const auto& info) { return std::string(to_string(info.param)); });
