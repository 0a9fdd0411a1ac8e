#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"

#include "strokeml/data/dataset.hpp"

namespace strokeml::reduce {

/// Bacterial foraging parameters.
///
/// Each of the `dispersal_steps` elimination-dispersal rounds runs
/// `reproduction_steps` reproduction rounds, each of which runs
/// `chemotaxis_steps` chemotactic steps. In a chemotactic step every bacterium
/// tumbles once (a random unit direction scaled by `step_size`) and then keeps
/// swimming in that direction, up to `swim_length` times, while its fitness
/// improves. Reproduction keeps the healthier half of the population and
/// duplicates it. Dispersal relocates each bacterium with probability
/// `dispersal_prob`. There is no cell-to-cell attraction term.
struct BfoConfig {
    std::size_t population = 20;
    std::size_t chemotaxis_steps = 20;
    std::size_t swim_length = 4;
    std::size_t reproduction_steps = 4;
    std::size_t dispersal_steps = 2;
    double dispersal_prob = 0.25;
    double step_size = 0.5;
    /// A feature is selected when its coordinate exceeds this value.
    double threshold = 0.5;
    std::uint64_t seed = 0;

    /// Throws Error(InvalidArgument) when an invariant is violated.
    void validate() const;
    /// Upper bound on objective evaluations for this configuration.
    std::size_t evaluation_budget() const;

    bool operator==(const BfoConfig&) const = default;
};

void to_json(nlohmann::json& j, const BfoConfig& c);
void from_json(const nlohmann::json& j, BfoConfig& c);

/// Feature-subset score; higher is better. Must be pure.
using FitnessFn = std::function<double(const std::vector<bool>& mask)>;

struct FeatureMask {
    std::vector<bool> selected;
    double fitness = 0.0;

    std::size_t n_selected() const;
    std::vector<std::size_t> indices() const;
    bool operator==(const FeatureMask&) const = default;
};

void to_json(nlohmann::json& j, const FeatureMask& m);
void from_json(const nlohmann::json& j, FeatureMask& m);

/// Bookkeeping from one optimizer run.
struct BfoTrace {
    /// Best-so-far fitness after initialization and after every chemotactic step.
    std::vector<double> best_fitness;
    /// Population size observed after each reproduction.
    std::vector<std::size_t> population_after_reproduction;
    /// Objective invocations (mask mode caches repeated masks).
    std::size_t evaluations = 0;
};

/// Wrapper feature selection over d features. Positions live in [0, 1]^d and
/// are thresholded into masks; an all-false mask selects the single feature
/// with the largest coordinate. Returns the best mask evaluated during the run.
FeatureMask bfo_select(std::size_t n_features, const FitnessFn& objective, const BfoConfig& cfg,
                       BfoTrace* trace = nullptr);

FeatureMask bfo_select(const data::FeatureMatrix& X, const data::LabelVector& y, const FitnessFn& objective,
                       const BfoConfig& cfg, BfoTrace* trace = nullptr);

struct BfoMinimum {
    std::vector<double> position;
    double value = 0.0;
};

/// Continuous mode: minimizes `cost` over the box [lower, upper]^dim.
BfoMinimum bfo_minimize(const std::function<double(std::span<const double>)>& cost, std::size_t dim,
                        double lower, double upper, const BfoConfig& cfg, BfoTrace* trace = nullptr);

}  // namespace strokeml::reduce
