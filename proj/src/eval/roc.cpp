#include "strokeml/eval/roc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "strokeml/error.hpp"

namespace strokeml::eval {

RocCurve roc(const data::RowMatrix& scores, const data::LabelVector& y_true, int class_id) {
    const std::size_t n = y_true.size();
    if (static_cast<std::size_t>(scores.rows()) != n) throw Error(ErrorCode::LengthMismatch, "scores and labels differ in length");
    if (class_id < 0 || class_id >= scores.cols()) {
        throw Error(ErrorCode::AbsentClass, "class " + std::to_string(class_id) + " has no score column");
    }
    std::vector<double> s(n);
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = scores(static_cast<Eigen::Index>(i), class_id);
        if (!std::isfinite(s[i])) throw Error(ErrorCode::NonFiniteFeature, "score at row " + std::to_string(i) + " is not finite");
        if (y_true.values[i] == class_id) ++positives;
    }
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) {
        throw Error(ErrorCode::AbsentClass, "class " + std::to_string(class_id) + " needs both positive and negative samples");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });

    RocCurve c;
    c.class_id = class_id;
    c.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0, fp = 0;
    // Twice the area in units of (1/positives)(1/negatives), kept integral until the end.
    std::uint64_t area2 = 0;
    for (std::size_t i = 0; i < n;) {
        const double t = s[order[i]];
        const std::size_t tp0 = tp, fp0 = fp;
        for (; i < n && s[order[i]] == t; ++i) {
            if (y_true.values[order[i]] == class_id) ++tp;
            else ++fp;
        }
        area2 += static_cast<std::uint64_t>(fp - fp0) * (tp + tp0);
        c.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives), t});
    }
    c.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
    return c;
}

std::vector<RocCurve> roc_all(const data::RowMatrix& scores, const data::LabelVector& y_true) {
    std::vector<RocCurve> out;
    const auto counts = y_true.counts();
    for (std::size_t c = 0; c < counts.size() && c < static_cast<std::size_t>(scores.cols()); ++c) {
        if (counts[c] > 0 && counts[c] < y_true.size()) out.push_back(roc(scores, y_true, static_cast<int>(c)));
    }
    return out;
}

void to_json(nlohmann::json& j, const RocCurve& c) {
    std::vector<double> fpr, tpr;
    nlohmann::json thr = nlohmann::json::array();
    for (const auto& p : c.points) {
        fpr.push_back(p.fpr);
        tpr.push_back(p.tpr);
        thr.push_back(std::isfinite(p.threshold) ? nlohmann::json(p.threshold) : nlohmann::json(nullptr));
    }
    j = {{"class_id", c.class_id}, {"auc", c.auc}, {"fpr", fpr}, {"tpr", tpr}, {"threshold", thr}};
}

void from_json(const nlohmann::json& j, RocCurve& c) {
    c.class_id = j.at("class_id").get<int>();
    c.auc = j.at("auc").get<double>();
    const auto fpr = j.at("fpr").get<std::vector<double>>();
    const auto tpr = j.at("tpr").get<std::vector<double>>();
    const auto& thr = j.at("threshold");
    if (fpr.size() != tpr.size() || fpr.size() != thr.size()) throw Error(ErrorCode::CorruptPayload, "ROC arrays differ in length");
    c.points.clear();
    for (std::size_t i = 0; i < fpr.size(); ++i) {
        const double t = thr[i].is_null() ? std::numeric_limits<double>::infinity() : thr[i].get<double>();
        c.points.push_back({fpr[i], tpr[i], t});
    }
}

}  // namespace strokeml::eval
