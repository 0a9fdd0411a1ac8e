#include "strokeml/pipeline/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "strokeml/error.hpp"

namespace strokeml::pipeline {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::InvalidConfig, where + ": " + what);
}

void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
    if (!node.IsMap()) bad(where, "expected a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.contains(key)) bad(where, "unknown key '" + key + "'");
    }
}

std::string scalar(const YAML::Node& node, const std::string& where) {
    if (!node.IsScalar()) bad(where, "expected a scalar value");
    return node.as<std::string>();
}

std::uint64_t unsigned_value(const YAML::Node& node, const std::string& where) {
    const auto s = scalar(node, where);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) bad(where, "'" + s + "' is not a non-negative integer");
    return v;
}

double real_value(const YAML::Node& node, const std::string& where) {
    const auto s = scalar(node, where);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) bad(where, "'" + s + "' is not a number");
    return v;
}

bool bool_value(const YAML::Node& node, const std::string& where) {
    const auto s = lower(scalar(node, where));
    if (s == "true" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "no" || s == "off") return false;
    bad(where, "'" + s + "' is not a boolean");
}

learn::LearnerSpec parse_learner(const YAML::Node& node, const std::string& where) {
    if (node.IsScalar()) return learn::LearnerSpec::make(learn::parse_learner_kind(node.as<std::string>()));
    check_keys(node, where, {"kind", "params"});
    if (!node["kind"]) bad(where, "missing 'kind'");
    learn::Hyperparams hp;
    if (const auto params = node["params"]) {
        if (!params.IsMap()) bad(where + ".params", "expected a mapping");
        for (const auto& kv : params) hp[kv.first.as<std::string>()] = scalar(kv.second, where + ".params." + kv.first.as<std::string>());
    }
    return learn::LearnerSpec::make(learn::parse_learner_kind(scalar(node["kind"], where + ".kind")), hp);
}

OptimizerConfig parse_optimizer(const YAML::Node& node, const std::string& where) {
    OptimizerConfig c;
    if (node.IsScalar()) {
        c.kind = parse_optimizer_kind(node.as<std::string>());
        return c;
    }
    if (!node.IsMap() || !node["kind"]) bad(where, "missing 'kind'");
    c.kind = parse_optimizer_kind(scalar(node["kind"], where + ".kind"));
    switch (c.kind) {
        case OptimizerKind::None: check_keys(node, where, {"kind"}); break;
        case OptimizerKind::PCA:
            check_keys(node, where, {"kind", "components", "variance"});
            if (node["components"] && node["variance"]) bad(where, "give either 'components' or 'variance', not both");
            if (node["components"]) {
                c.pca_components = unsigned_value(node["components"], where + ".components");
                if (*c.pca_components == 0) bad(where + ".components", "must be >= 1");
            }
            if (node["variance"]) {
                c.pca_variance = real_value(node["variance"], where + ".variance");
                if (!(c.pca_variance > 0.0 && c.pca_variance <= 1.0)) bad(where + ".variance", "must lie in (0, 1]");
            }
            break;
        case OptimizerKind::LDA:
            check_keys(node, where, {"kind", "shrinkage"});
            if (node["shrinkage"]) {
                c.lda_shrinkage = real_value(node["shrinkage"], where + ".shrinkage");
                if (!(c.lda_shrinkage >= 0.0 && c.lda_shrinkage <= 1.0)) bad(where + ".shrinkage", "must lie in [0, 1]");
            }
            break;
        case OptimizerKind::BFO: {
            check_keys(node, where, {"kind", "population", "chemotaxis_steps", "swim_length", "reproduction_steps",
                                     "dispersal_steps", "dispersal_prob", "step_size", "threshold", "wrapper", "folds"});
            auto& b = c.bfo;
            auto count = [&](const char* key, std::size_t& out) {
                if (node[key]) out = unsigned_value(node[key], where + "." + key);
            };
            auto real = [&](const char* key, double& out) {
                if (node[key]) out = real_value(node[key], where + "." + key);
            };
            count("population", b.population);
            count("chemotaxis_steps", b.chemotaxis_steps);
            count("swim_length", b.swim_length);
            count("reproduction_steps", b.reproduction_steps);
            count("dispersal_steps", b.dispersal_steps);
            real("dispersal_prob", b.dispersal_prob);
            real("step_size", b.step_size);
            real("threshold", b.threshold);
            count("folds", c.bfo_folds);
            if (node["wrapper"]) c.bfo_learner = parse_learner(node["wrapper"], where + ".wrapper");
            try {
                b.validate();
            } catch (const Error& e) {
                bad(where, e.what());
            }
            if (c.bfo_folds < 2) bad(where + ".folds", "must be >= 2");
            break;
        }
    }
    return c;
}

Evaluation parse_evaluation(const YAML::Node& node, const std::string& where) {
    check_keys(node, where, {"mode", "k"});
    Evaluation e;
    if (node["mode"]) {
        const auto m = lower(scalar(node["mode"], where + ".mode"));
        if (m == "kfold") e.mode = Evaluation::Mode::KFold;
        else if (m == "holdout") e.mode = Evaluation::Mode::Holdout;
        else bad(where + ".mode", "must be kfold or holdout");
    }
    if (node["k"]) e.k = unsigned_value(node["k"], where + ".k");
    if (e.k < 2) bad(where + ".k", "must be >= 2");
    return e;
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
    return p.is_relative() && !base.empty() ? base / p : p;
}

YAML::Node load_yaml(std::string_view text) {
    try {
        return YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("YAML: ") + e.what());
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Shared by single configs and grids.
void parse_common(const YAML::Node& root, PipelineConfig& c) {
    if (!root["seed"]) bad("config", "'seed' is required");
    c.seed = unsigned_value(root["seed"], "seed");
    if (root["standardize"]) c.standardize = bool_value(root["standardize"], "standardize");
    if (root["evaluation"]) c.evaluation = parse_evaluation(root["evaluation"], "evaluation");
}

}  // namespace

std::string_view to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::None: return "None";
        case OptimizerKind::BFO: return "BFO";
        case OptimizerKind::PCA: return "PCA";
        case OptimizerKind::LDA: return "LDA";
    }
    return "?";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
    const auto n = lower(name);
    for (auto k : all_optimizer_kinds()) {
        if (lower(to_string(k)) == n) return k;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown optimizer '" + std::string(name) + "'");
}

const std::vector<OptimizerKind>& all_optimizer_kinds() {
    static const std::vector<OptimizerKind> kinds{OptimizerKind::None, OptimizerKind::BFO, OptimizerKind::PCA,
                                                  OptimizerKind::LDA};
    return kinds;
}

const std::vector<std::string>& known_extractors() {
    static const std::vector<std::string> names{"DenseNet201", "InceptionV3", "MobileNetV2", "ResNet50", "Xception"};
    return names;
}

std::string_view to_string(Evaluation::Mode mode) { return mode == Evaluation::Mode::KFold ? "kfold" : "holdout"; }

std::string PipelineConfig::label() const {
    const std::string extractor = extractor_tag.empty() ? features_path.stem().string() : extractor_tag;
    return extractor + "+" + std::string(to_string(optimizer.kind)) + "+" + std::string(learn::to_string(classifier.kind()));
}

void to_json(nlohmann::json& j, const OptimizerConfig& c) {
    j = {{"kind", std::string(to_string(c.kind))}};
    switch (c.kind) {
        case OptimizerKind::None: break;
        case OptimizerKind::PCA:
            if (c.pca_components) j["components"] = *c.pca_components;
            else j["variance"] = c.pca_variance;
            break;
        case OptimizerKind::LDA: j["shrinkage"] = c.lda_shrinkage; break;
        case OptimizerKind::BFO: {
            nlohmann::json b = c.bfo;
            b.erase("seed");
            j.update(b);
            nlohmann::json w = c.bfo_learner;
            w.erase("seed");
            j["wrapper"] = w;
            j["folds"] = c.bfo_folds;
            break;
        }
    }
}

void from_json(const nlohmann::json& j, OptimizerConfig& c) {
    c = OptimizerConfig{};
    c.kind = parse_optimizer_kind(j.at("kind").get<std::string>());
    switch (c.kind) {
        case OptimizerKind::None: break;
        case OptimizerKind::PCA:
            if (j.contains("components")) c.pca_components = j.at("components").get<std::size_t>();
            else c.pca_variance = j.at("variance").get<double>();
            break;
        case OptimizerKind::LDA: c.lda_shrinkage = j.at("shrinkage").get<double>(); break;
        case OptimizerKind::BFO: {
            nlohmann::json b = j;
            b["seed"] = 0;
            c.bfo = b.get<reduce::BfoConfig>();
            c.bfo_learner = j.at("wrapper").get<learn::LearnerSpec>();
            c.bfo_folds = j.at("folds").get<std::size_t>();
            break;
        }
    }
}

void to_json(nlohmann::json& j, const PipelineConfig& c) {
    nlohmann::json clf = c.classifier;
    clf.erase("seed");
    j = {{"features", c.features_path.generic_string()},
         {"extractor", c.extractor_tag},
         {"optimizer", c.optimizer},
         {"classifier", clf},
         {"standardize", c.standardize},
         {"seed", c.seed},
         {"evaluation", {{"mode", std::string(to_string(c.evaluation.mode))}, {"k", c.evaluation.k}}}};
}

void from_json(const nlohmann::json& j, PipelineConfig& c) {
    c = PipelineConfig{};
    c.features_path = j.at("features").get<std::string>();
    c.extractor_tag = j.at("extractor").get<std::string>();
    c.optimizer = j.at("optimizer").get<OptimizerConfig>();
    c.classifier = j.at("classifier").get<learn::LearnerSpec>();
    c.standardize = j.at("standardize").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    const auto& e = j.at("evaluation");
    c.evaluation.mode = e.at("mode").get<std::string>() == "holdout" ? Evaluation::Mode::Holdout : Evaluation::Mode::KFold;
    c.evaluation.k = e.at("k").get<std::size_t>();
}

std::vector<PipelineConfig> ExperimentGrid::expand() const {
    std::vector<PipelineConfig> out;
    out.reserve(size());
    for (const auto& f : features) {
        for (const auto& o : optimizers) {
            for (const auto& l : classifiers) {
                PipelineConfig c = base;
                c.features_path = f.path;
                c.extractor_tag = f.extractor_tag;
                c.optimizer = o;
                c.classifier = l;
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

PipelineConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir) {
    const YAML::Node root = load_yaml(yaml_text);
    check_keys(root, "config", {"features", "extractor", "optimizer", "classifier", "standardize", "seed", "evaluation"});
    PipelineConfig c;
    parse_common(root, c);
    if (!root["features"]) bad("config", "'features' is required");
    c.features_path = resolve(scalar(root["features"], "features"), base_dir);
    if (root["extractor"]) c.extractor_tag = scalar(root["extractor"], "extractor");
    if (root["optimizer"]) c.optimizer = parse_optimizer(root["optimizer"], "optimizer");
    if (!root["classifier"]) bad("config", "'classifier' is required");
    c.classifier = parse_learner(root["classifier"], "classifier");
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_text(path), path.parent_path());
}

ExperimentGrid parse_grid(std::string_view yaml_text, const std::filesystem::path& base_dir) {
    const YAML::Node root = load_yaml(yaml_text);
    check_keys(root, "grid config", {"standardize", "seed", "evaluation", "grid"});
    ExperimentGrid g;
    parse_common(root, g.base);
    const YAML::Node grid = root["grid"];
    if (!grid) bad("grid config", "'grid' is required");
    check_keys(grid, "grid", {"features", "optimizers", "classifiers"});
    for (const char* axis : {"features", "optimizers", "classifiers"}) {
        if (!grid[axis] || !grid[axis].IsSequence() || grid[axis].size() == 0) {
            bad(std::string("grid.") + axis, "expected a non-empty list");
        }
    }
    for (std::size_t i = 0; i < grid["features"].size(); ++i) {
        const auto node = grid["features"][i];
        const std::string where = "grid.features[" + std::to_string(i) + "]";
        FeatureSource f;
        if (node.IsScalar()) {
            f.path = resolve(node.as<std::string>(), base_dir);
        } else {
            check_keys(node, where, {"path", "extractor"});
            if (!node["path"]) bad(where, "missing 'path'");
            f.path = resolve(scalar(node["path"], where + ".path"), base_dir);
            if (node["extractor"]) f.extractor_tag = scalar(node["extractor"], where + ".extractor");
        }
        g.features.push_back(std::move(f));
    }
    for (std::size_t i = 0; i < grid["optimizers"].size(); ++i) {
        g.optimizers.push_back(parse_optimizer(grid["optimizers"][i], "grid.optimizers[" + std::to_string(i) + "]"));
    }
    for (std::size_t i = 0; i < grid["classifiers"].size(); ++i) {
        g.classifiers.push_back(parse_learner(grid["classifiers"][i], "grid.classifiers[" + std::to_string(i) + "]"));
    }
    return g;
}

ExperimentGrid load_grid(const std::filesystem::path& path) { return parse_grid(read_text(path), path.parent_path()); }

}  // namespace strokeml::pipeline
