#pragma once

#include <vector>

#include "json.hpp"

#include "strokeml/data/dataset.hpp"

namespace strokeml::eval {

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    /// Score at or above which samples are called positive; +inf for (0, 0).
    double threshold = 0.0;
    bool operator==(const RocPoint&) const = default;
};

/// One-vs-rest curve for `class_id`. Tied scores form a single step.
struct RocCurve {
    int class_id = 0;
    std::vector<RocPoint> points;
    double auc = 0.0;
    bool operator==(const RocCurve&) const = default;
};

/// `scores` has one column per declared class. Throws AbsentClass when
/// `class_id` has no positive or no negative sample.
RocCurve roc(const data::RowMatrix& scores, const data::LabelVector& y_true, int class_id);

/// Curves for every class that has both positives and negatives.
std::vector<RocCurve> roc_all(const data::RowMatrix& scores, const data::LabelVector& y_true);

void to_json(nlohmann::json& j, const RocCurve& c);
void from_json(const nlohmann::json& j, RocCurve& c);

}  // namespace strokeml::eval
