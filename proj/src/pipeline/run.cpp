#include "strokeml/pipeline/run.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <future>
#include <ctime>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "strokeml/error.hpp"
#include "strokeml/io/codec.hpp"
#include "strokeml/simd/kernels.hpp"

namespace strokeml::pipeline {
namespace {

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Features {
    data::LoadedFeatures data;
    std::string sha256;
};

std::shared_ptr<const Features> load(const std::filesystem::path& path) {
    auto f = std::make_shared<Features>();
    f->data = data::load_features(path);
    f->sha256 = io::sha256_file(path);
    return f;
}

RunRecord failed_record(const PipelineConfig& config, const std::string& code, const std::string& message) {
    RunRecord r;
    r.config = config;
    r.label = config.label();
    r.ok = false;
    r.error_code = code;
    r.error = message;
    r.kernel_isa = std::string(simd::to_string(simd::active().isa));
    r.timestamp = utc_now();
    return r;
}

}  // namespace

RunResult run_loaded(const PipelineConfig& config, const data::LoadedFeatures& features,
                     const std::string& features_sha256, const RunOptions& options) {
    const auto& X = features.X;
    const auto& y = features.y;
    RunResult out;
    RunRecord& r = out.record;
    r.config = config;
    r.label = config.label();
    r.features_sha256 = features_sha256;
    r.n_samples = X.n_samples();
    r.n_features = X.n_features();
    r.class_names = y.class_names;
    r.kernel_isa = std::string(simd::to_string(simd::active().isa));
    try {
        if (config.evaluation.mode == Evaluation::Mode::KFold) {
            const auto cv = eval::cross_validate(config, X, y, config.evaluation.k, config.seed);
            r.metrics = cv.mean;
            r.metrics_weighted = cv.mean_weighted;
            r.per_fold = cv.per_fold;
            r.per_fold_weighted = cv.per_fold_weighted;
            r.train_sizes = cv.train_sizes;
            r.test_sizes = cv.test_sizes;
            r.confusion = cv.confusion;
            r.roc = cv.roc;
        } else {
            const auto h = eval::holdout(config, X, y, features.split, config.seed);
            r.metrics = h.report;
            r.metrics_weighted = h.report_weighted;
            r.train_sizes = {h.n_train};
            r.test_sizes = {h.n_test};
            r.split_column_used = h.from_split_column;
            r.confusion = h.confusion;
            r.roc = h.roc;
        }
        if (options.bench_repetitions > 0) {
            r.bench = eval::benchmark(config, X, y, options.bench_repetitions, config.seed);
        }
        if (!options.curve_fractions.empty()) {
            r.curve = eval::learning_curve(config, X, y, options.curve_fractions, config.evaluation.k, config.seed);
        }
        if (options.fit_final_model) {
            // The final model sees every row the evaluation protocol allows for training.
            const eval::AugmentationIndex aug(X);
            std::vector<std::size_t> train = aug.originals;
            if (config.evaluation.mode == Evaluation::Mode::Holdout && features.split) {
                train.clear();
                for (std::size_t i : aug.originals) {
                    if (features.split->split[i] == data::Split::Train) train.push_back(i);
                }
            }
            train = aug.training_rows(train);
            out.model = fit_pipeline(config, X.select_rows(train), y.select(train), config.seed);
        }
    } catch (const Error& e) {
        throw with_context(e, r.label);
    }
    r.timestamp = utc_now();
    return out;
}

RunResult run(const PipelineConfig& config, const RunOptions& options) {
    std::shared_ptr<const Features> f;
    try {
        f = load(config.features_path);
    } catch (const Error& e) {
        throw with_context(e, config.label() + " (" + config.features_path.string() + ")");
    }
    return run_loaded(config, f->data, f->sha256, options);
}

std::vector<SummaryRow> rank_records(const std::vector<RunRecord>& records) {
    std::vector<SummaryRow> ok, failed;
    for (std::size_t i = 0; i < records.size(); ++i) {
        (records[i].ok ? ok : failed).push_back({records[i].index, 0, false, &records[i]});
    }
    std::stable_sort(ok.begin(), ok.end(), [](const SummaryRow& a, const SummaryRow& b) {
        if (a.record->metrics.accuracy != b.record->metrics.accuracy) return a.record->metrics.accuracy > b.record->metrics.accuracy;
        if (a.record->metrics.f1 != b.record->metrics.f1) return a.record->metrics.f1 > b.record->metrics.f1;
        return a.index < b.index;
    });
    std::sort(failed.begin(), failed.end(), [](const SummaryRow& a, const SummaryRow& b) { return a.index < b.index; });
    for (std::size_t i = 0; i < ok.size(); ++i) ok[i].rank = i + 1;
    if (!ok.empty()) ok.front().best = true;
    ok.insert(ok.end(), failed.begin(), failed.end());
    return ok;
}

GridResult run_grid(const std::vector<PipelineConfig>& cells, std::size_t parallelism, const RunOptions& options) {
    GridResult g;
    g.records.resize(cells.size());

    std::mutex cache_mutex;
    std::map<std::filesystem::path, std::shared_future<std::shared_ptr<const Features>>> cache;
    auto features_for = [&](const std::filesystem::path& path) {
        std::shared_future<std::shared_ptr<const Features>> fut;
        std::promise<std::shared_ptr<const Features>> promise;
        bool loader = false;
        {
            std::lock_guard lock(cache_mutex);
            auto it = cache.find(path);
            if (it == cache.end()) {
                fut = promise.get_future().share();
                cache.emplace(path, fut);
                loader = true;
            } else {
                fut = it->second;
            }
        }
        if (loader) {
            try {
                promise.set_value(load(path));
            } catch (...) {
                promise.set_exception(std::current_exception());
            }
        }
        return fut.get();
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const auto& config = cells[i];
            RunRecord rec;
            try {
                const auto f = features_for(config.features_path);
                RunOptions opts = options;
                opts.fit_final_model = false;
                rec = run_loaded(config, f->data, f->sha256, opts).record;
            } catch (const Error& e) {
                rec = failed_record(config, std::string(to_string(e.code())), e.what());
            } catch (const std::exception& e) {
                rec = failed_record(config, "Internal", e.what());
            }
            rec.index = i;
            g.records[i] = std::move(rec);
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(cells.size(), 1));
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    g.summary = rank_records(g.records);
    return g;
}

GridResult run_grid(const ExperimentGrid& grid, std::size_t parallelism, const RunOptions& options) {
    return run_grid(grid.expand(), parallelism, options);
}

nlohmann::json record_to_json(const RunRecord& r, bool include_timestamp) {
    nlohmann::json j = {{"index", r.index},
                        {"label", r.label},
                        {"config", r.config},
                        {"ok", r.ok},
                        {"kernel_isa", r.kernel_isa},
                        {"artifacts", {{"features_sha256", r.features_sha256}}},
                        {"n_samples", r.n_samples},
                        {"n_features", r.n_features},
                        {"class_names", r.class_names}};
    if (!r.ok) {
        j["error"] = {{"code", r.error_code}, {"message", r.error}};
    } else {
        j["metrics"] = r.metrics;
        j["metrics_weighted"] = r.metrics_weighted;
        j["train_sizes"] = r.train_sizes;
        j["test_sizes"] = r.test_sizes;
        if (!r.per_fold.empty()) {
            j["per_fold"] = r.per_fold;
            j["per_fold_weighted"] = r.per_fold_weighted;
        }
        j["split_column_used"] = r.split_column_used;
        j["confusion"] = r.confusion;
        j["roc"] = r.roc;
        if (r.bench) j["bench"] = *r.bench;
        if (!r.curve.empty()) j["learning_curve"] = r.curve;
    }
    if (include_timestamp) j["timestamp"] = r.timestamp;
    return j;
}

RunRecord record_from_json(const nlohmann::json& j) {
    try {
        RunRecord r;
        r.index = j.at("index").get<std::size_t>();
        r.label = j.at("label").get<std::string>();
        r.config = j.at("config").get<PipelineConfig>();
        r.ok = j.at("ok").get<bool>();
        r.kernel_isa = j.value("kernel_isa", "");
        r.features_sha256 = j.at("artifacts").value("features_sha256", "");
        r.n_samples = j.value("n_samples", std::size_t{0});
        r.n_features = j.value("n_features", std::size_t{0});
        r.class_names = j.value("class_names", std::vector<std::string>{});
        r.timestamp = j.value("timestamp", "");
        if (!r.ok) {
            r.error_code = j.at("error").at("code").get<std::string>();
            r.error = j.at("error").at("message").get<std::string>();
            return r;
        }
        r.metrics = j.at("metrics").get<eval::MetricsReport>();
        r.metrics_weighted = j.at("metrics_weighted").get<eval::MetricsReport>();
        r.train_sizes = j.at("train_sizes").get<std::vector<std::size_t>>();
        r.test_sizes = j.at("test_sizes").get<std::vector<std::size_t>>();
        if (j.contains("per_fold")) {
            r.per_fold = j.at("per_fold").get<std::vector<eval::MetricsReport>>();
            r.per_fold_weighted = j.at("per_fold_weighted").get<std::vector<eval::MetricsReport>>();
        }
        r.split_column_used = j.value("split_column_used", false);
        r.confusion = j.at("confusion").get<eval::ConfusionMatrix>();
        r.roc = j.at("roc").get<std::vector<eval::RocCurve>>();
        if (j.contains("bench")) r.bench = j.at("bench").get<eval::BenchReport>();
        if (j.contains("learning_curve")) r.curve = j.at("learning_curve").get<std::vector<eval::CurveRow>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CorruptPayload, std::string("run record: ") + e.what());
    }
}

}  // namespace strokeml::pipeline
