#include "strokeml/data/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "strokeml/error.hpp"

namespace strokeml::data {

FeatureMatrix::FeatureMatrix(std::size_t n_samples, std::size_t n_features, std::vector<double> values,
                             std::vector<std::string> sample_ids)
    : n_samples_(n_samples),
      n_features_(n_features),
      values_(std::move(values)),
      sample_ids_(std::move(sample_ids)) {
    if (values_.size() != n_samples_ * n_features_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "value buffer holds " + std::to_string(values_.size()) + " entries, expected " +
                        std::to_string(n_samples_) + "x" + std::to_string(n_features_));
    }
    if (sample_ids_.empty()) {
        sample_ids_.reserve(n_samples_);
        for (std::size_t i = 0; i < n_samples_; ++i) sample_ids_.push_back(std::to_string(i));
    } else if (sample_ids_.size() != n_samples_) {
        throw Error(ErrorCode::DimensionMismatch, "sample id count does not match row count");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw Error(ErrorCode::NonFiniteFeature,
                        "non-finite value at row " + std::to_string(i / std::max<std::size_t>(n_features_, 1)) +
                            ", column " + std::to_string(i % std::max<std::size_t>(n_features_, 1)));
        }
    }
}

FeatureMatrix FeatureMatrix::from_eigen(const RowMatrix& m, std::vector<std::string> sample_ids) {
    std::vector<double> v(m.data(), m.data() + m.size());
    return FeatureMatrix(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()), std::move(v),
                         std::move(sample_ids));
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
    std::vector<double> v;
    v.reserve(rows.size() * n_features_);
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (std::size_t r : rows) {
        const auto src = row(r);
        v.insert(v.end(), src.begin(), src.end());
        ids.push_back(sample_ids_[r]);
    }
    return FeatureMatrix(rows.size(), n_features_, std::move(v), std::move(ids));
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> columns) const {
    for (std::size_t c : columns) {
        if (c >= n_features_) throw Error(ErrorCode::DimensionMismatch, "column index out of range");
    }
    std::vector<double> v;
    v.reserve(n_samples_ * columns.size());
    for (std::size_t i = 0; i < n_samples_; ++i) {
        for (std::size_t c : columns) v.push_back(values_[i * n_features_ + c]);
    }
    return FeatureMatrix(n_samples_, columns.size(), std::move(v), sample_ids_);
}

std::vector<std::size_t> LabelVector::counts() const {
    std::vector<std::size_t> c(class_names.size(), 0);
    for (int v : values) ++c[static_cast<std::size_t>(v)];
    return c;
}

std::size_t LabelVector::n_present() const {
    const auto c = counts();
    return static_cast<std::size_t>(std::count_if(c.begin(), c.end(), [](std::size_t x) { return x > 0; }));
}

LabelVector LabelVector::select(std::span<const std::size_t> rows) const {
    LabelVector out;
    out.class_names = class_names;
    out.values.reserve(rows.size());
    for (std::size_t r : rows) out.values.push_back(values[r]);
    return out;
}

const std::vector<std::string>& stroke_class_names() {
    static const std::vector<std::string> names{"Normal", "Ischemic", "Hemorrhagic"};
    return names;
}

LabelVector make_labels(std::vector<int> values, std::vector<std::string> class_names) {
    for (int v : values) {
        if (v < 0 || static_cast<std::size_t>(v) >= class_names.size()) {
            throw Error(ErrorCode::UnknownLabel, "label index " + std::to_string(v) + " outside class set");
        }
    }
    return LabelVector{std::move(values), std::move(class_names)};
}

std::string_view to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Test: return "test";
        case Split::Validation: return "val";
    }
    return "";
}

std::vector<std::size_t> SplitAssignment::indices(Split which) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split.size(); ++i) {
        if (split[i] == which) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_index.size(); ++i) {
        if (fold_index[i] != fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_index.size(); ++i) {
        if (fold_index[i] == fold) out.push_back(i);
    }
    return out;
}

bool is_augmented_id(std::string_view id) {
    const auto pos = id.rfind("#aug");
    if (pos == std::string_view::npos) return false;
    const auto tail = id.substr(pos + 4);
    return std::all_of(tail.begin(), tail.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
}

std::string_view source_id(std::string_view id) {
    if (!is_augmented_id(id)) return id;
    return id.substr(0, id.rfind("#aug"));
}

}  // namespace strokeml::data
