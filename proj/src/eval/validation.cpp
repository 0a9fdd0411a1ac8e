#include "strokeml/eval/validation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "strokeml/data/split.hpp"
#include "strokeml/error.hpp"
#include "strokeml/io/codec.hpp"
#include "strokeml/pipeline/model.hpp"
#include "strokeml/rng.hpp"

namespace strokeml::eval {
namespace {

struct Scored {
    ConfusionMatrix cm;
    data::RowMatrix scores;
    data::LabelVector y_true;
};

// Fits on `train`, scores `test`; score columns are widened to every declared class.
Scored fit_and_score(const pipeline::PipelineConfig& config, const data::FeatureMatrix& X, const data::LabelVector& y,
                     const std::vector<std::size_t>& train, const std::vector<std::size_t>& test, std::uint64_t seed,
                     std::string* digest) {
    const auto model = pipeline::fit_pipeline(config, X.select_rows(train), y.select(train), seed);
    if (digest) *digest = io::sha256_hex(model.to_json().dump());
    const data::FeatureMatrix Xt = X.select_rows(test);
    const data::RowMatrix local = model.predict_scores(Xt);
    const auto& classes = model.classifier.classes();
    Scored s;
    s.scores = data::RowMatrix::Zero(static_cast<Eigen::Index>(test.size()), static_cast<Eigen::Index>(y.n_classes()));
    for (std::size_t c = 0; c < classes.size(); ++c) s.scores.col(classes[c]) = local.col(static_cast<Eigen::Index>(c));
    s.y_true = y.select(test);
    s.cm = confusion(s.y_true, model.predict(Xt));
    return s;
}

void append_scores(data::RowMatrix& dst, const data::RowMatrix& src) {
    const Eigen::Index r = dst.rows();
    dst.conservativeResize(r + src.rows(), src.cols());
    dst.bottomRows(src.rows()) = src;
}

}  // namespace

AugmentationIndex::AugmentationIndex(const data::FeatureMatrix& X) {
    const auto& ids = X.sample_ids();
    const std::size_t n = X.n_samples();
    source.assign(n, std::nullopt);
    augmented.assign(n, false);
    std::map<std::string_view, std::size_t> by_id;
    for (std::size_t i = 0; i < n; ++i) {
        if (data::is_augmented_id(ids[i])) {
            augmented[i] = true;
        } else {
            originals.push_back(i);
            by_id.emplace(ids[i], i);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!augmented[i]) continue;
        if (auto it = by_id.find(data::source_id(ids[i])); it != by_id.end()) source[i] = it->second;
    }
}

std::vector<std::size_t> AugmentationIndex::training_rows(const std::vector<std::size_t>& train_originals) const {
    std::vector<bool> in_train(augmented.size(), false);
    for (std::size_t r : train_originals) in_train[r] = true;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < augmented.size(); ++i) {
        if (!augmented[i] ? in_train[i] : (!source[i] || in_train[*source[i]])) out.push_back(i);
    }
    return out;
}

MetricsReport mean_report(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw Error(ErrorCode::EmptyMatrix, "no reports to average");
    MetricsReport m;
    m.averaging = reports.front().averaging;
    m.per_class.resize(reports.front().per_class.size());
    const double n = static_cast<double>(reports.size());
    for (const auto& r : reports) {
        m.accuracy += r.accuracy / n;
        m.precision += r.precision / n;
        m.recall += r.recall / n;
        m.f1 += r.f1 / n;
        m.zero_division = m.zero_division || r.zero_division;
        for (std::size_t c = 0; c < m.per_class.size(); ++c) {
            m.per_class[c].precision += r.per_class[c].precision / n;
            m.per_class[c].recall += r.per_class[c].recall / n;
            m.per_class[c].f1 += r.per_class[c].f1 / n;
            m.per_class[c].support += r.per_class[c].support;
            m.per_class[c].precision_undefined = m.per_class[c].precision_undefined || r.per_class[c].precision_undefined;
            m.per_class[c].recall_undefined = m.per_class[c].recall_undefined || r.per_class[c].recall_undefined;
        }
    }
    return m;
}

CvResult cross_validate(const pipeline::PipelineConfig& config, const data::FeatureMatrix& X, const data::LabelVector& y,
                        std::size_t k, std::uint64_t seed, const CvOptions& options) {
    if (y.size() != X.n_samples()) throw Error(ErrorCode::LengthMismatch, "labels and rows differ in length");
    const AugmentationIndex aug(X);
    const data::LabelVector y_orig = y.select(aug.originals);
    const data::FoldPlan plan = data::stratified_kfold(y_orig, k, seed);

    CvResult r;
    r.k = k;
    r.seed = seed;
    r.confusion = ConfusionMatrix(y.n_classes());
    r.y_true.class_names = y.class_names;
    r.scores.resize(0, static_cast<Eigen::Index>(y.n_classes()));
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i : plan.train_indices(f)) train.push_back(aug.originals[i]);
        for (std::size_t i : plan.test_indices(f)) test.push_back(aug.originals[i]);
        train = aug.training_rows(train);
        std::string digest;
        const Scored s = fit_and_score(config, X, y, train, test, derive_seed(seed, f),
                                       options.record_model_digests ? &digest : nullptr);
        if (options.record_model_digests) r.model_digests.push_back(digest);
        r.per_fold.push_back(metrics(s.cm, Averaging::Macro));
        r.per_fold_weighted.push_back(metrics(s.cm, Averaging::Weighted));
        r.fold_confusion.push_back(s.cm);
        r.train_sizes.push_back(train.size());
        r.test_sizes.push_back(test.size());
        r.confusion += s.cm;
        r.rows.insert(r.rows.end(), test.begin(), test.end());
        r.y_true.values.insert(r.y_true.values.end(), s.y_true.values.begin(), s.y_true.values.end());
        append_scores(r.scores, s.scores);
    }
    r.mean = mean_report(r.per_fold);
    r.mean_weighted = mean_report(r.per_fold_weighted);
    r.roc = roc_all(r.scores, r.y_true);
    return r;
}

HoldoutResult holdout(const pipeline::PipelineConfig& config, const data::FeatureMatrix& X, const data::LabelVector& y,
                      const std::optional<data::SplitAssignment>& split, std::uint64_t seed) {
    if (y.size() != X.n_samples()) throw Error(ErrorCode::LengthMismatch, "labels and rows differ in length");
    const AugmentationIndex aug(X);
    std::vector<std::size_t> train, test;
    HoldoutResult r;
    if (split) {
        if (split->split.size() != X.n_samples()) throw Error(ErrorCode::LengthMismatch, "split column length differs from rows");
        r.from_split_column = true;
        for (std::size_t i : aug.originals) {
            if (split->split[i] == data::Split::Train) train.push_back(i);
            else if (split->split[i] == data::Split::Test) test.push_back(i);
        }
    } else {
        const auto assignment = data::stratified_split(y.select(aug.originals), data::stroke_dataset_fractions(), seed);
        for (std::size_t i = 0; i < aug.originals.size(); ++i) {
            if (assignment.split[i] == data::Split::Train) train.push_back(aug.originals[i]);
            else if (assignment.split[i] == data::Split::Test) test.push_back(aug.originals[i]);
        }
    }
    if (test.empty()) throw Error(ErrorCode::EmptyMatrix, "holdout has no test rows");
    train = aug.training_rows(train);
    const Scored s = fit_and_score(config, X, y, train, test, derive_seed(seed, 0), nullptr);
    r.confusion = s.cm;
    r.report = metrics(s.cm, Averaging::Macro);
    r.report_weighted = metrics(s.cm, Averaging::Weighted);
    r.rows = test;
    r.scores = s.scores;
    r.y_true = s.y_true;
    r.roc = roc_all(r.scores, r.y_true);
    r.n_train = train.size();
    r.n_test = test.size();
    return r;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size()));
    return s;
}

std::vector<CurveRow> learning_curve(const pipeline::PipelineConfig& config, const data::FeatureMatrix& X,
                                     const data::LabelVector& y, std::vector<double> fractions, std::size_t k,
                                     std::uint64_t seed) {
    if (fractions.empty()) throw Error(ErrorCode::InvalidArgument, "no training fractions given");
    for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw Error(ErrorCode::InvalidArgument, "training fractions must lie in (0, 1]");
    }
    std::sort(fractions.begin(), fractions.end());
    const AugmentationIndex aug(X);

    // Per-class shuffled originals; a fraction keeps a prefix of each list.
    std::vector<std::vector<std::size_t>> by_class(y.n_classes());
    for (std::size_t i : aug.originals) by_class[y.values[i]].push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        Rng rng(derive_seed(seed, c));
        rng.shuffle(std::span<std::size_t>(by_class[c]));
    }

    std::vector<CurveRow> rows;
    for (double f : fractions) {
        std::vector<std::size_t> keep;
        if (f == 1.0) {
            keep = aug.originals;
        } else {
            for (std::size_t c = 0; c < by_class.size(); ++c) {
                if (by_class[c].empty()) continue;
                const auto n = static_cast<std::size_t>(std::llround(f * static_cast<double>(by_class[c].size())));
                if (n < k) {
                    throw Error(ErrorCode::FractionTooSmall, "fraction " + std::to_string(f) + " keeps " + std::to_string(n) +
                                                                 " samples of class '" + y.class_names[c] +
                                                                 "', fewer than k = " + std::to_string(k));
                }
                keep.insert(keep.end(), by_class[c].begin(), by_class[c].begin() + static_cast<std::ptrdiff_t>(n));
            }
            std::sort(keep.begin(), keep.end());
        }
        keep = aug.training_rows(keep);
        const CvResult cv = cross_validate(config, X.select_rows(keep), y.select(keep), k, seed);
        std::vector<double> acc, prec, rec, f1;
        for (const auto& m : cv.per_fold) {
            acc.push_back(m.accuracy);
            prec.push_back(m.precision);
            rec.push_back(m.recall);
            f1.push_back(m.f1);
        }
        rows.push_back({f, keep.size(), summarize(acc), summarize(prec), summarize(rec), summarize(f1)});
    }
    return rows;
}

void to_json(nlohmann::json& j, const CvResult& r) {
    j = {{"k", r.k},
         {"seed", r.seed},
         {"per_fold", r.per_fold},
         {"per_fold_weighted", r.per_fold_weighted},
         {"fold_confusion", r.fold_confusion},
         {"train_sizes", r.train_sizes},
         {"test_sizes", r.test_sizes},
         {"mean", r.mean},
         {"mean_weighted", r.mean_weighted}};
    if (!r.model_digests.empty()) j["model_digests"] = r.model_digests;
}

void to_json(nlohmann::json& j, const HoldoutResult& r) {
    j = {{"report", r.report},
         {"report_weighted", r.report_weighted},
         {"n_train", r.n_train},
         {"n_test", r.n_test},
         {"from_split_column", r.from_split_column}};
}

void to_json(nlohmann::json& j, const CurveRow& r) {
    auto s = [](const Summary& v) { return nlohmann::json{{"mean", v.mean}, {"std", v.std}}; };
    j = {{"fraction", r.fraction},       {"n_samples", r.n_samples},   {"accuracy", s(r.accuracy)},
         {"precision", s(r.precision)}, {"recall", s(r.recall)},      {"f1", s(r.f1)}};
}

void from_json(const nlohmann::json& j, CurveRow& r) {
    auto s = [&](const char* key) { return Summary{j.at(key).at("mean").get<double>(), j.at(key).at("std").get<double>()}; };
    r.fraction = j.at("fraction").get<double>();
    r.n_samples = j.at("n_samples").get<std::size_t>();
    r.accuracy = s("accuracy");
    r.precision = s("precision");
    r.recall = s("recall");
    r.f1 = s("f1");
}

}  // namespace strokeml::eval
