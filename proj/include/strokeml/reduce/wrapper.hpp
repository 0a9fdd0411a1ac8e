#pragma once

#include <cstdint>

#include "strokeml/data/dataset.hpp"
#include "strokeml/learn/learner.hpp"
#include "strokeml/reduce/bfo.hpp"

namespace strokeml::reduce {

/// Mean stratified k-fold accuracy of `learner` trained on the masked columns.
/// The fold plan is fixed at construction, so the returned function is pure.
/// Copies X and y.
FitnessFn wrapper_fitness(const data::FeatureMatrix& X, const data::LabelVector& y, const learn::LearnerSpec& learner,
                          std::size_t folds, std::uint64_t seed);

}  // namespace strokeml::reduce
