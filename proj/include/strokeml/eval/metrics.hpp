#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "strokeml/data/dataset.hpp"

namespace strokeml::eval {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    std::size_t n_classes = 0;
    std::vector<std::uint64_t> counts;  // row-major n_classes x n_classes

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t c) : n_classes(c), counts(c * c, 0) {}

    std::uint64_t& at(std::size_t t, std::size_t p) { return counts[t * n_classes + p]; }
    std::uint64_t at(std::size_t t, std::size_t p) const { return counts[t * n_classes + p]; }
    std::uint64_t total() const;
    std::uint64_t trace() const;
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
    bool operator==(const ConfusionMatrix&) const = default;
};

/// Shape is y_true.n_classes(); throws LengthMismatch / EmptyMatrix.
ConfusionMatrix confusion(const data::LabelVector& y_true, const data::LabelVector& y_pred);

enum class Averaging { Macro, Weighted };
std::string_view to_string(Averaging a);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;
    /// Set when the denominator was zero and 0 was substituted.
    bool precision_undefined = false;
    bool recall_undefined = false;

    bool operator==(const ClassMetrics&) const = default;
};

struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    /// 2PR / (P + R) from the averaged precision and recall.
    double f1 = 0.0;
    Averaging averaging = Averaging::Macro;
    std::vector<ClassMetrics> per_class;
    /// Any class hit a zero denominator.
    bool zero_division = false;

    bool operator==(const MetricsReport&) const = default;
};

/// Throws EmptyMatrix when the matrix total is 0.
MetricsReport metrics(const ConfusionMatrix& cm, Averaging averaging = Averaging::Macro);

/// Pooled TP / (TP + FN) over all classes.
double micro_recall(const ConfusionMatrix& cm);

/// Harmonic mean, 0 when both are 0.
double harmonic_f1(double precision, double recall);

void to_json(nlohmann::json& j, const ConfusionMatrix& cm);
void from_json(const nlohmann::json& j, ConfusionMatrix& cm);
void to_json(nlohmann::json& j, const ClassMetrics& m);
void from_json(const nlohmann::json& j, ClassMetrics& m);
void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);

}  // namespace strokeml::eval
