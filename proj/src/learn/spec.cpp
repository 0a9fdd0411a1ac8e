#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "strokeml/data/csv.hpp"
#include "strokeml/error.hpp"
#include "strokeml/learn/learner.hpp"

namespace strokeml::learn {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

[[noreturn]] void out_of_range(const std::string& key, const std::string& value, const std::string& why) {
    throw Error(ErrorCode::HyperparamOutOfRange, "'" + key + "' = '" + value + "': " + why);
}

double to_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) out_of_range(key, value, "not a finite number");
    return v;
}

double positive(const std::string& key, const std::string& value) {
    const double v = to_double(key, value);
    if (!(v > 0.0)) out_of_range(key, value, "must be > 0");
    return v;
}

double non_negative(const std::string& key, const std::string& value) {
    const double v = to_double(key, value);
    if (!(v >= 0.0)) out_of_range(key, value, "must be >= 0");
    return v;
}

std::size_t count(const std::string& key, const std::string& value, std::size_t min_value) {
    const double v = to_double(key, value);
    if (v != std::floor(v) || v < static_cast<double>(min_value) || v > 1e12) {
        out_of_range(key, value, "must be an integer >= " + std::to_string(min_value));
    }
    return static_cast<std::size_t>(v);
}

bool boolean(const std::string& key, const std::string& value) {
    const auto v = lower(value);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    out_of_range(key, value, "must be true or false");
}

std::string num(double v) { return data::format_double(v); }

const std::set<std::string>& allowed_keys(LearnerKind kind) {
    static const std::map<LearnerKind, std::set<std::string>> keys{
        {LearnerKind::SVC, {"kernel", "C", "gamma", "tol", "max_passes"}},
        {LearnerKind::KNN, {"k", "metric"}},
        {LearnerKind::DT, {"criterion", "max_depth", "min_samples_leaf", "min_impurity_decrease"}},
        {LearnerKind::RF, {"n_trees", "max_features", "bootstrap"}},
        {LearnerKind::XGB, {"n_rounds", "learning_rate", "max_depth", "lambda", "gamma"}},
        {LearnerKind::LR, {"l2", "max_iter", "tol"}},
        {LearnerKind::GNB, {"var_smoothing"}},
    };
    return keys.at(kind);
}

LearnerParams parse_params(LearnerKind kind, const Hyperparams& hp) {
    const auto& allowed = allowed_keys(kind);
    for (const auto& [key, value] : hp) {
        if (!allowed.contains(key)) {
            throw Error(ErrorCode::UnknownHyperparam,
                        "'" + key + "' is not a " + std::string(to_string(kind)) + " hyperparameter");
        }
    }
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = hp.find(key);
        return it == hp.end() ? nullptr : &it->second;
    };

    switch (kind) {
        case LearnerKind::SVC: {
            SvcParams p;
            if (auto v = get("kernel")) {
                const auto k = lower(*v);
                if (k == "rbf") p.kernel = SvcKernel::Rbf;
                else if (k == "linear") p.kernel = SvcKernel::Linear;
                else out_of_range("kernel", *v, "must be rbf or linear");
            }
            if (auto v = get("C")) p.C = positive("C", *v);
            if (auto v = get("gamma"); v && lower(*v) != "scale") p.gamma = positive("gamma", *v);
            if (auto v = get("tol")) p.tol = positive("tol", *v);
            if (auto v = get("max_passes")) p.max_passes = count("max_passes", *v, 1);
            return p;
        }
        case LearnerKind::KNN: {
            KnnParams p;
            if (auto v = get("k")) p.k = count("k", *v, 1);
            if (auto v = get("metric"); v && lower(*v) != "euclidean") out_of_range("metric", *v, "only euclidean is supported");
            return p;
        }
        case LearnerKind::DT: {
            TreeParams p;
            if (auto v = get("criterion"); v && lower(*v) != "gini") out_of_range("criterion", *v, "only gini is supported");
            if (auto v = get("max_depth"); v && lower(*v) != "none") p.max_depth = count("max_depth", *v, 1);
            if (auto v = get("min_samples_leaf")) p.min_samples_leaf = count("min_samples_leaf", *v, 1);
            if (auto v = get("min_impurity_decrease")) p.min_impurity_decrease = non_negative("min_impurity_decrease", *v);
            return p;
        }
        case LearnerKind::RF: {
            RfParams p;
            if (auto v = get("n_trees")) p.n_trees = count("n_trees", *v, 1);
            if (auto v = get("max_features")) {
                const auto m = lower(*v);
                if (m == "sqrt") p.max_features.rule = MaxFeatures::Rule::Sqrt;
                else if (m == "log2") p.max_features.rule = MaxFeatures::Rule::Log2;
                else if (m == "all" || m == "none") p.max_features.rule = MaxFeatures::Rule::All;
                else {
                    p.max_features.rule = MaxFeatures::Rule::Count;
                    p.max_features.count = count("max_features", *v, 1);
                }
            }
            if (auto v = get("bootstrap")) p.bootstrap = boolean("bootstrap", *v);
            return p;
        }
        case LearnerKind::XGB: {
            XgbParams p;
            if (auto v = get("n_rounds")) p.n_rounds = count("n_rounds", *v, 1);
            if (auto v = get("learning_rate")) {
                p.learning_rate = positive("learning_rate", *v);
                if (p.learning_rate > 1.0) out_of_range("learning_rate", *v, "must be <= 1");
            }
            if (auto v = get("max_depth")) p.max_depth = count("max_depth", *v, 1);
            if (auto v = get("lambda")) p.lambda = non_negative("lambda", *v);
            if (auto v = get("gamma")) p.gamma = non_negative("gamma", *v);
            return p;
        }
        case LearnerKind::LR: {
            LrParams p;
            if (auto v = get("l2")) p.l2 = non_negative("l2", *v);
            if (auto v = get("max_iter")) p.max_iter = count("max_iter", *v, 1);
            if (auto v = get("tol")) p.tol = positive("tol", *v);
            return p;
        }
        case LearnerKind::GNB: {
            GnbParams p;
            if (auto v = get("var_smoothing")) p.var_smoothing = non_negative("var_smoothing", *v);
            return p;
        }
    }
    throw Error(ErrorCode::InvalidConfig, "unhandled learner kind");
}

}  // namespace

std::string_view to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::SVC: return "SVC";
        case LearnerKind::RF: return "RF";
        case LearnerKind::GNB: return "GNB";
        case LearnerKind::DT: return "DT";
        case LearnerKind::XGB: return "XGB";
        case LearnerKind::KNN: return "KNN";
        case LearnerKind::LR: return "LR";
    }
    return "?";
}

LearnerKind parse_learner_kind(std::string_view name) {
    const auto n = lower(name);
    for (LearnerKind k : all_learner_kinds()) {
        if (lower(to_string(k)) == n) return k;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown classifier '" + std::string(name) + "'");
}

const std::array<LearnerKind, 7>& all_learner_kinds() {
    static const std::array<LearnerKind, 7> kinds{LearnerKind::SVC, LearnerKind::RF,  LearnerKind::GNB, LearnerKind::DT,
                                                  LearnerKind::XGB, LearnerKind::KNN, LearnerKind::LR};
    return kinds;
}

std::size_t MaxFeatures::resolve(std::size_t n_features) const {
    std::size_t m = n_features;
    switch (rule) {
        case Rule::Sqrt: m = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features))); break;
        case Rule::Log2: m = static_cast<std::size_t>(std::log2(static_cast<double>(n_features))); break;
        case Rule::All: m = n_features; break;
        case Rule::Count: m = count; break;
    }
    return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(n_features, 1));
}

LearnerSpec LearnerSpec::make(LearnerKind kind, const Hyperparams& hyperparams, std::uint64_t seed) {
    LearnerSpec s;
    s.kind_ = kind;
    s.seed_ = seed;
    s.params_ = parse_params(kind, hyperparams);
    return s;
}

LearnerSpec LearnerSpec::with_seed(std::uint64_t seed) const {
    LearnerSpec s = *this;
    s.seed_ = seed;
    return s;
}

Hyperparams LearnerSpec::materialized() const {
    Hyperparams out;
    switch (kind_) {
        case LearnerKind::SVC: {
            const auto& p = get<SvcParams>();
            out["kernel"] = p.kernel == SvcKernel::Rbf ? "rbf" : "linear";
            out["C"] = num(p.C);
            out["gamma"] = p.gamma ? num(*p.gamma) : "scale";
            out["tol"] = num(p.tol);
            out["max_passes"] = std::to_string(p.max_passes);
            break;
        }
        case LearnerKind::KNN:
            out["k"] = std::to_string(get<KnnParams>().k);
            out["metric"] = "euclidean";
            break;
        case LearnerKind::DT: {
            const auto& p = get<TreeParams>();
            out["criterion"] = "gini";
            out["max_depth"] = p.max_depth == 0 ? "none" : std::to_string(p.max_depth);
            out["min_samples_leaf"] = std::to_string(p.min_samples_leaf);
            out["min_impurity_decrease"] = num(p.min_impurity_decrease);
            break;
        }
        case LearnerKind::RF: {
            const auto& p = get<RfParams>();
            out["n_trees"] = std::to_string(p.n_trees);
            switch (p.max_features.rule) {
                case MaxFeatures::Rule::Sqrt: out["max_features"] = "sqrt"; break;
                case MaxFeatures::Rule::Log2: out["max_features"] = "log2"; break;
                case MaxFeatures::Rule::All: out["max_features"] = "all"; break;
                case MaxFeatures::Rule::Count: out["max_features"] = std::to_string(p.max_features.count); break;
            }
            out["bootstrap"] = p.bootstrap ? "true" : "false";
            break;
        }
        case LearnerKind::XGB: {
            const auto& p = get<XgbParams>();
            out["n_rounds"] = std::to_string(p.n_rounds);
            out["learning_rate"] = num(p.learning_rate);
            out["max_depth"] = std::to_string(p.max_depth);
            out["lambda"] = num(p.lambda);
            out["gamma"] = num(p.gamma);
            break;
        }
        case LearnerKind::LR: {
            const auto& p = get<LrParams>();
            out["l2"] = num(p.l2);
            out["max_iter"] = std::to_string(p.max_iter);
            out["tol"] = num(p.tol);
            break;
        }
        case LearnerKind::GNB:
            out["var_smoothing"] = num(get<GnbParams>().var_smoothing);
            break;
    }
    return out;
}

void to_json(nlohmann::json& j, const LearnerSpec& s) {
    j = {{"kind", std::string(to_string(s.kind()))}, {"params", s.materialized()}, {"seed", s.seed()}};
}

void from_json(const nlohmann::json& j, LearnerSpec& s) {
    s = LearnerSpec::make(parse_learner_kind(j.at("kind").get<std::string>()),
                          j.value("params", Hyperparams{}), j.value("seed", std::uint64_t{0}));
}

}  // namespace strokeml::learn
