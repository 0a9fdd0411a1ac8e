#include "strokeml/reduce/wrapper.hpp"

#include <memory>

#include "strokeml/data/split.hpp"
#include "strokeml/error.hpp"

namespace strokeml::reduce {

FitnessFn wrapper_fitness(const data::FeatureMatrix& X, const data::LabelVector& y, const learn::LearnerSpec& learner,
                          std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw Error(ErrorCode::InvalidArgument, "wrapper fitness needs at least 2 folds");
    if (y.size() != X.n_samples()) throw Error(ErrorCode::LengthMismatch, "labels and rows differ in length");

    struct State {
        data::FeatureMatrix X;
        data::LabelVector y;
        learn::LearnerSpec learner;
        std::vector<std::vector<std::size_t>> train, test;
    };
    auto state = std::make_shared<State>();
    state->X = X;
    state->y = y;
    state->learner = learner;
    const data::FoldPlan plan = data::stratified_kfold(y, folds, seed);
    for (std::size_t f = 0; f < folds; ++f) {
        state->train.push_back(plan.train_indices(f));
        state->test.push_back(plan.test_indices(f));
    }

    return [state](const std::vector<bool>& mask) {
        const auto& s = *state;
        if (mask.size() != s.X.n_features()) throw Error(ErrorCode::DimensionMismatch, "mask width differs from features");
        std::vector<std::size_t> columns;
        for (std::size_t j = 0; j < mask.size(); ++j) {
            if (mask[j]) columns.push_back(j);
        }
        if (columns.empty()) throw Error(ErrorCode::InvalidArgument, "empty feature mask");
        const data::FeatureMatrix Xm = s.X.select_columns(columns);
        double total = 0.0;
        for (std::size_t f = 0; f < s.train.size(); ++f) {
            const auto model = learn::fit(s.learner, Xm.select_rows(s.train[f]), s.y.select(s.train[f]));
            const auto pred = model.predict(Xm.select_rows(s.test[f]));
            std::size_t correct = 0;
            for (std::size_t i = 0; i < s.test[f].size(); ++i) {
                if (pred.values[i] == s.y.values[s.test[f][i]]) ++correct;
            }
            total += static_cast<double>(correct) / static_cast<double>(s.test[f].size());
        }
        return total / static_cast<double>(s.train.size());
    };
}

}  // namespace strokeml::reduce
