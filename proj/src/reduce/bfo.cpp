#include "strokeml/reduce/bfo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "strokeml/error.hpp"
#include "strokeml/rng.hpp"

namespace strokeml::reduce {
namespace {

struct Bacterium {
    std::vector<double> position;
    double fitness = 0.0;
    double health = 0.0;
};

struct Best {
    std::vector<double> position;
    double fitness = -std::numeric_limits<double>::infinity();
};

// Maximizes `score` over [lower, upper]^dim. `score` is called once per
// position visited; the caller may memoize.
template <typename Score>
Best forage(std::size_t dim, double lower, double upper, Score&& score, const BfoConfig& cfg, BfoTrace* trace) {
    cfg.validate();
    Rng rng(cfg.seed);
    Best best;
    auto consider = [&](const std::vector<double>& pos, double f) {
        if (f > best.fitness) {
            best.fitness = f;
            best.position = pos;
        }
    };
    auto random_position = [&] {
        std::vector<double> p(dim);
        for (double& v : p) v = rng.uniform(lower, upper);
        return p;
    };

    std::vector<Bacterium> colony(cfg.population);
    for (auto& b : colony) {
        b.position = random_position();
        b.fitness = score(b.position);
        consider(b.position, b.fitness);
    }
    if (trace) trace->best_fitness.push_back(best.fitness);

    std::vector<double> direction(dim);
    for (std::size_t ed = 0; ed < cfg.dispersal_steps; ++ed) {
        for (std::size_t re = 0; re < cfg.reproduction_steps; ++re) {
            for (auto& b : colony) b.health = 0.0;
            for (std::size_t step = 0; step < cfg.chemotaxis_steps; ++step) {
                for (auto& b : colony) {
                    // Tumble: uniform direction on the unit sphere.
                    double norm = 0.0;
                    do {
                        norm = 0.0;
                        for (double& v : direction) {
                            v = rng.normal();
                            norm += v * v;
                        }
                    } while (norm == 0.0);
                    norm = std::sqrt(norm);
                    for (double& v : direction) v /= norm;

                    auto move = [&] {
                        for (std::size_t k = 0; k < dim; ++k) {
                            b.position[k] = std::clamp(b.position[k] + cfg.step_size * direction[k], lower, upper);
                        }
                        b.fitness = score(b.position);
                        consider(b.position, b.fitness);
                    };
                    double last = b.fitness;
                    move();
                    for (std::size_t swim = 0; swim < cfg.swim_length && b.fitness > last; ++swim) {
                        last = b.fitness;
                        move();
                    }
                    b.health += b.fitness;
                }
                if (trace) trace->best_fitness.push_back(best.fitness);
            }

            // Reproduction: the healthier half splits, the rest die.
            std::vector<std::size_t> order(colony.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return colony[a].health > colony[b].health; });
            std::vector<Bacterium> next;
            next.reserve(colony.size());
            const std::size_t half = colony.size() / 2;
            for (std::size_t r = 0; r < half; ++r) next.push_back(colony[order[r]]);
            for (std::size_t r = 0; r < half; ++r) next.push_back(colony[order[r]]);
            colony = std::move(next);
            if (trace) trace->population_after_reproduction.push_back(colony.size());
        }

        // Dispersal after the final round would never be searched from, so skip it.
        if (ed + 1 < cfg.dispersal_steps) {
            for (auto& b : colony) {
                if (rng.bernoulli(cfg.dispersal_prob)) {
                    b.position = random_position();
                    b.fitness = score(b.position);
                    consider(b.position, b.fitness);
                }
            }
        }
    }
    return best;
}

}  // namespace

void BfoConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, "BFO: " + msg); };
    if (population < 2 || population % 2 != 0) fail("population must be even and >= 2");
    if (chemotaxis_steps < 1 || swim_length < 1 || reproduction_steps < 1 || dispersal_steps < 1) {
        fail("step counts must be >= 1");
    }
    if (!(dispersal_prob > 0.0 && dispersal_prob < 1.0)) fail("dispersal probability must lie in (0, 1)");
    if (!(step_size > 0.0) || !std::isfinite(step_size)) fail("step size must be positive");
    if (!(threshold > 0.0 && threshold < 1.0)) fail("threshold must lie in (0, 1)");
}

std::size_t BfoConfig::evaluation_budget() const {
    return population * chemotaxis_steps * (swim_length + 1) * reproduction_steps * dispersal_steps +
           population * dispersal_steps;
}

void to_json(nlohmann::json& j, const BfoConfig& c) {
    j = {{"population", c.population},
         {"chemotaxis_steps", c.chemotaxis_steps},
         {"swim_length", c.swim_length},
         {"reproduction_steps", c.reproduction_steps},
         {"dispersal_steps", c.dispersal_steps},
         {"dispersal_prob", c.dispersal_prob},
         {"step_size", c.step_size},
         {"threshold", c.threshold},
         {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, BfoConfig& c) {
    c.population = j.at("population").get<std::size_t>();
    c.chemotaxis_steps = j.at("chemotaxis_steps").get<std::size_t>();
    c.swim_length = j.at("swim_length").get<std::size_t>();
    c.reproduction_steps = j.at("reproduction_steps").get<std::size_t>();
    c.dispersal_steps = j.at("dispersal_steps").get<std::size_t>();
    c.dispersal_prob = j.at("dispersal_prob").get<double>();
    c.step_size = j.at("step_size").get<double>();
    c.threshold = j.at("threshold").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
}

std::size_t FeatureMask::n_selected() const {
    return static_cast<std::size_t>(std::count(selected.begin(), selected.end(), true));
}

std::vector<std::size_t> FeatureMask::indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        if (selected[i]) out.push_back(i);
    }
    return out;
}

void to_json(nlohmann::json& j, const FeatureMask& m) {
    j = {{"selected", m.indices()}, {"n_features", m.selected.size()}, {"fitness", m.fitness}};
}

void from_json(const nlohmann::json& j, FeatureMask& m) {
    m.selected.assign(j.at("n_features").get<std::size_t>(), false);
    for (auto idx : j.at("selected").get<std::vector<std::size_t>>()) {
        if (idx >= m.selected.size()) throw Error(ErrorCode::CorruptPayload, "feature mask index out of range");
        m.selected[idx] = true;
    }
    m.fitness = j.at("fitness").get<double>();
}

FeatureMask bfo_select(std::size_t n_features, const FitnessFn& objective, const BfoConfig& cfg, BfoTrace* trace) {
    if (n_features == 0) throw Error(ErrorCode::InvalidArgument, "BFO needs at least one feature");
    auto to_mask = [&](const std::vector<double>& pos) {
        std::vector<bool> mask(pos.size());
        bool any = false;
        for (std::size_t k = 0; k < pos.size(); ++k) {
            mask[k] = pos[k] > cfg.threshold;
            any = any || mask[k];
        }
        if (!any) mask[static_cast<std::size_t>(std::max_element(pos.begin(), pos.end()) - pos.begin())] = true;
        return mask;
    };
    std::map<std::vector<bool>, double> cache;
    std::size_t calls = 0;
    auto score = [&](const std::vector<double>& pos) {
        auto mask = to_mask(pos);
        if (auto it = cache.find(mask); it != cache.end()) return it->second;
        const double f = objective(mask);
        ++calls;
        cache.emplace(std::move(mask), f);
        return f;
    };
    const Best best = forage(n_features, 0.0, 1.0, score, cfg, trace);
    if (trace) trace->evaluations = calls;
    return FeatureMask{to_mask(best.position), best.fitness};
}

FeatureMask bfo_select(const data::FeatureMatrix& X, const data::LabelVector& y, const FitnessFn& objective,
                       const BfoConfig& cfg, BfoTrace* trace) {
    if (y.size() != X.n_samples()) throw Error(ErrorCode::LengthMismatch, "labels and rows differ in length");
    return bfo_select(X.n_features(), objective, cfg, trace);
}

BfoMinimum bfo_minimize(const std::function<double(std::span<const double>)>& cost, std::size_t dim, double lower,
                        double upper, const BfoConfig& cfg, BfoTrace* trace) {
    if (dim == 0 || !(lower < upper)) throw Error(ErrorCode::InvalidArgument, "BFO needs a non-empty box");
    std::size_t calls = 0;
    auto score = [&](const std::vector<double>& pos) {
        ++calls;
        return -cost(pos);
    };
    const Best best = forage(dim, lower, upper, score, cfg, trace);
    if (trace) trace->evaluations = calls;
    return BfoMinimum{best.position, -best.fitness};
}

}  // namespace strokeml::reduce
