#pragma once

#include <cstdint>
#include <span>

#include "strokeml/data/dataset.hpp"

namespace strokeml::data {

struct SplitFractions {
    double train = 0.0;
    double test = 0.0;
    double validation = 0.0;
};

/// Train/test/val shares of the 3819-image stroke dataset (2397/919/503).
SplitFractions stroke_dataset_fractions();

/// Per-class split: class c receives round(fraction * |c|) samples per split,
/// apportioned by largest remainder, so each count is within 1 of its target.
/// Throws ClassTooSmall when a present class has fewer than 3 samples.
SplitAssignment stratified_split(const LabelVector& labels, const SplitFractions& fractions, std::uint64_t seed);

/// Same, with separate fractions per class (indexed by class id).
SplitAssignment stratified_split(const LabelVector& labels, std::span<const SplitFractions> per_class,
                                 std::uint64_t seed);

/// Stratified k-fold plan. Throws ClassSmallerThanK when a present class has
/// fewer than k samples.
FoldPlan stratified_kfold(const LabelVector& labels, std::size_t k, std::uint64_t seed);

/// Largest-remainder apportionment of `total` items over `weights` (sum 1).
/// Exposed for the learning-curve subsampler and tests.
std::vector<std::size_t> apportion(std::size_t total, std::span<const double> weights);

}  // namespace strokeml::data
