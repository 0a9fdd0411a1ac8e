#include "strokeml/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "strokeml/error.hpp"
#include "strokeml/rng.hpp"

namespace strokeml::data {
namespace {

std::vector<std::vector<std::size_t>> members_by_class(const LabelVector& labels) {
    std::vector<std::vector<std::size_t>> members(labels.n_classes());
    for (std::size_t i = 0; i < labels.size(); ++i) members[static_cast<std::size_t>(labels.values[i])].push_back(i);
    return members;
}

void check_fractions(const SplitFractions& f) {
    if (!(f.train > 0.0 && f.test > 0.0 && f.validation > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "split fractions must all be positive");
    }
    if (std::abs(f.train + f.test + f.validation - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "split fractions must sum to 1");
    }
}

}  // namespace

SplitFractions stroke_dataset_fractions() { return {2397.0 / 3819.0, 919.0 / 3819.0, 503.0 / 3819.0}; }

std::vector<std::size_t> apportion(std::size_t total, std::span<const double> weights) {
    std::vector<std::size_t> out(weights.size());
    std::vector<double> remainder(weights.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = static_cast<double>(total) * weights[i];
        out[i] = static_cast<std::size_t>(std::floor(exact));
        remainder[i] = exact - static_cast<double>(out[i]);
        assigned += out[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t r = 0; assigned < total && r < order.size(); ++r, ++assigned) ++out[order[r]];
    return out;
}

SplitAssignment stratified_split(const LabelVector& labels, const SplitFractions& fractions, std::uint64_t seed) {
    std::vector<SplitFractions> per_class(labels.n_classes(), fractions);
    return stratified_split(labels, per_class, seed);
}

SplitAssignment stratified_split(const LabelVector& labels, std::span<const SplitFractions> per_class,
                                 std::uint64_t seed) {
    if (per_class.size() != labels.n_classes()) {
        throw Error(ErrorCode::InvalidArgument, "need one fraction triple per class");
    }
    for (const auto& f : per_class) check_fractions(f);

    auto members = members_by_class(labels);
    SplitAssignment out{std::vector<Split>(labels.size(), Split::Train)};
    for (std::size_t c = 0; c < members.size(); ++c) {
        auto& idx = members[c];
        if (idx.empty()) continue;
        if (idx.size() < 3) {
            throw Error(ErrorCode::ClassTooSmall, "class '" + labels.class_names[c] + "' has " +
                                                      std::to_string(idx.size()) + " samples; need at least 3");
        }
        const double w[3] = {per_class[c].train, per_class[c].test, per_class[c].validation};
        const auto counts = apportion(idx.size(), w);
        Rng rng(derive_seed(seed, c));
        rng.shuffle(std::span<std::size_t>(idx));
        std::size_t pos = 0;
        const Split order[3] = {Split::Train, Split::Test, Split::Validation};
        for (int s = 0; s < 3; ++s) {
            for (std::size_t n = 0; n < counts[static_cast<std::size_t>(s)]; ++n) out.split[idx[pos++]] = order[s];
        }
    }
    return out;
}

FoldPlan stratified_kfold(const LabelVector& labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "k-fold requires k >= 2");
    auto members = members_by_class(labels);
    for (std::size_t c = 0; c < members.size(); ++c) {
        if (!members[c].empty() && members[c].size() < k) {
            throw Error(ErrorCode::ClassSmallerThanK, "class '" + labels.class_names[c] + "' has " +
                                                          std::to_string(members[c].size()) +
                                                          " samples, fewer than k=" + std::to_string(k));
        }
    }
    // Classes are laid out back to back and dealt round-robin, so both the
    // fold totals and each class's per-fold counts differ by at most one.
    Rng rng(seed);
    FoldPlan plan{k, seed, std::vector<std::size_t>(labels.size(), 0)};
    std::size_t pos = 0;
    for (auto& idx : members) {
        rng.shuffle(std::span<std::size_t>(idx));
        for (std::size_t i : idx) plan.fold_index[i] = pos++ % k;
    }
    return plan;
}

}  // namespace strokeml::data
