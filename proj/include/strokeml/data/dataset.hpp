#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace strokeml::data {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense row-major sample-by-feature table. Values are always finite.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    /// Validates shape and finiteness; throws Error(NonFiniteFeature / DimensionMismatch).
    FeatureMatrix(std::size_t n_samples, std::size_t n_features, std::vector<double> values,
                  std::vector<std::string> sample_ids = {});

    static FeatureMatrix from_eigen(const RowMatrix& m, std::vector<std::string> sample_ids = {});

    std::size_t n_samples() const noexcept { return n_samples_; }
    std::size_t n_features() const noexcept { return n_features_; }
    bool empty() const noexcept { return n_samples_ == 0; }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * n_features_, n_features_};
    }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_features_ + j]; }

    std::span<const double> values() const noexcept { return values_; }
    const std::vector<std::string>& sample_ids() const noexcept { return sample_ids_; }

    Eigen::Map<const RowMatrix> as_eigen() const {
        return {values_.data(), static_cast<Eigen::Index>(n_samples_),
                static_cast<Eigen::Index>(n_features_)};
    }

    FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
    FeatureMatrix select_columns(std::span<const std::size_t> columns) const;

    bool operator==(const FeatureMatrix&) const = default;

private:
    std::size_t n_samples_ = 0;
    std::size_t n_features_ = 0;
    std::vector<double> values_;
    std::vector<std::string> sample_ids_;
};

/// Class labels encoded as dense indices into `class_names`.
struct LabelVector {
    std::vector<int> values;
    std::vector<std::string> class_names;

    std::size_t size() const noexcept { return values.size(); }
    std::size_t n_classes() const noexcept { return class_names.size(); }
    /// Per-class sample counts, length n_classes().
    std::vector<std::size_t> counts() const;
    /// Number of classes with at least one sample.
    std::size_t n_present() const;
    LabelVector select(std::span<const std::size_t> rows) const;

    bool operator==(const LabelVector&) const = default;
};

/// Normal=0, Ischemic=1, Hemorrhagic=2.
const std::vector<std::string>& stroke_class_names();

LabelVector make_labels(std::vector<int> values, std::vector<std::string> class_names);

enum class Split : std::uint8_t { Train, Test, Validation };

std::string_view to_string(Split s);

struct SplitAssignment {
    std::vector<Split> split;

    std::vector<std::size_t> indices(Split which) const;
    bool operator==(const SplitAssignment&) const = default;
};

struct FoldPlan {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> fold_index;

    std::vector<std::size_t> train_indices(std::size_t fold) const;
    std::vector<std::size_t> test_indices(std::size_t fold) const;
    bool operator==(const FoldPlan&) const = default;
};

/// Augmented rows carry an id of the form "<source-id>#aug<N>".
bool is_augmented_id(std::string_view id);
std::string_view source_id(std::string_view id);

}  // namespace strokeml::data
