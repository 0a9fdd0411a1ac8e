#include "strokeml/eval/metrics.hpp"

#include <numeric>

#include "strokeml/error.hpp"

namespace strokeml::eval {

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < n_classes; ++i) t += at(i, i);
    return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (other.n_classes != n_classes) throw Error(ErrorCode::DimensionMismatch, "confusion matrices differ in shape");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    return *this;
}

ConfusionMatrix confusion(const data::LabelVector& y_true, const data::LabelVector& y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(y_true.size()) + " true labels but " +
                                                   std::to_string(y_pred.size()) + " predictions");
    }
    if (y_true.size() == 0) throw Error(ErrorCode::EmptyMatrix, "no labels to tally");
    ConfusionMatrix cm(y_true.n_classes());
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true.values[i];
        const int p = y_pred.values[i];
        if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= cm.n_classes || static_cast<std::size_t>(p) >= cm.n_classes) {
            throw Error(ErrorCode::UnknownLabel, "label index outside the declared classes at position " + std::to_string(i));
        }
        ++cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
    }
    return cm;
}

std::string_view to_string(Averaging a) { return a == Averaging::Macro ? "macro" : "weighted"; }

double harmonic_f1(double precision, double recall) {
    const double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

MetricsReport metrics(const ConfusionMatrix& cm, Averaging averaging) {
    const std::uint64_t total = cm.total();
    if (total == 0) throw Error(ErrorCode::EmptyMatrix, "confusion matrix is empty");
    const std::size_t c = cm.n_classes;
    MetricsReport r;
    r.averaging = averaging;
    r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
    r.per_class.resize(c);
    for (std::size_t k = 0; k < c; ++k) {
        std::uint64_t predicted = 0, actual = 0;
        for (std::size_t i = 0; i < c; ++i) {
            predicted += cm.at(i, k);
            actual += cm.at(k, i);
        }
        const auto tp = static_cast<double>(cm.at(k, k));
        auto& m = r.per_class[k];
        m.support = actual;
        m.precision_undefined = predicted == 0;
        m.recall_undefined = actual == 0;
        m.precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
        m.recall = actual ? tp / static_cast<double>(actual) : 0.0;
        m.f1 = harmonic_f1(m.precision, m.recall);
        r.zero_division = r.zero_division || m.precision_undefined || m.recall_undefined;
    }
    for (std::size_t k = 0; k < c; ++k) {
        const double w = averaging == Averaging::Macro
                             ? 1.0 / static_cast<double>(c)
                             : static_cast<double>(r.per_class[k].support) / static_cast<double>(total);
        r.precision += w * r.per_class[k].precision;
        r.recall += w * r.per_class[k].recall;
    }
    r.f1 = harmonic_f1(r.precision, r.recall);
    return r;
}

double micro_recall(const ConfusionMatrix& cm) {
    std::uint64_t tp = 0, fn = 0;
    for (std::size_t k = 0; k < cm.n_classes; ++k) {
        tp += cm.at(k, k);
        for (std::size_t p = 0; p < cm.n_classes; ++p) {
            if (p != k) fn += cm.at(k, p);
        }
    }
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

void to_json(nlohmann::json& j, const ConfusionMatrix& cm) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < cm.n_classes; ++i) {
        rows.push_back(std::vector<std::uint64_t>(cm.counts.begin() + static_cast<std::ptrdiff_t>(i * cm.n_classes),
                                                  cm.counts.begin() + static_cast<std::ptrdiff_t>((i + 1) * cm.n_classes)));
    }
    j = rows;
}

void from_json(const nlohmann::json& j, ConfusionMatrix& cm) {
    cm = ConfusionMatrix(j.size());
    for (std::size_t i = 0; i < cm.n_classes; ++i) {
        const auto row = j.at(i).get<std::vector<std::uint64_t>>();
        if (row.size() != cm.n_classes) throw Error(ErrorCode::CorruptPayload, "confusion matrix is not square");
        for (std::size_t k = 0; k < row.size(); ++k) cm.at(i, k) = row[k];
    }
}

void to_json(nlohmann::json& j, const ClassMetrics& m) {
    j = {{"precision", m.precision},
         {"recall", m.recall},
         {"f1", m.f1},
         {"support", m.support},
         {"precision_undefined", m.precision_undefined},
         {"recall_undefined", m.recall_undefined}};
}

void from_json(const nlohmann::json& j, ClassMetrics& m) {
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.support = j.at("support").get<std::uint64_t>();
    m.precision_undefined = j.at("precision_undefined").get<bool>();
    m.recall_undefined = j.at("recall_undefined").get<bool>();
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
    j = {{"accuracy", r.accuracy},   {"precision", r.precision},
         {"recall", r.recall},       {"f1", r.f1},
         {"averaging", std::string(to_string(r.averaging))},
         {"per_class", r.per_class}, {"zero_division", r.zero_division}};
}

void from_json(const nlohmann::json& j, MetricsReport& r) {
    r.accuracy = j.at("accuracy").get<double>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.f1 = j.at("f1").get<double>();
    r.averaging = j.at("averaging").get<std::string>() == "weighted" ? Averaging::Weighted : Averaging::Macro;
    r.per_class = j.at("per_class").get<std::vector<ClassMetrics>>();
    r.zero_division = j.at("zero_division").get<bool>();
}

}  // namespace strokeml::eval
