#include "strokeml/eval/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <sys/resource.h>
#include <unistd.h>

#include "strokeml/data/split.hpp"
#include "strokeml/error.hpp"
#include "strokeml/eval/validation.hpp"
#include "strokeml/pipeline/model.hpp"
#include "strokeml/rng.hpp"

namespace strokeml::eval {
namespace {

std::string significant(double v) {
    char buf[64];
    if (v >= 100.0) std::snprintf(buf, sizeof buf, "%.0f", v);
    else if (v >= 10.0) std::snprintf(buf, sizeof buf, "%.1f", v);
    else std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

double mib(std::uint64_t bytes) { return static_cast<double>(bytes) / (1024.0 * 1024.0); }

}  // namespace

std::uint64_t current_rss_bytes() {
#if defined(__linux__)
    std::ifstream statm("/proc/self/statm");
    std::uint64_t size = 0, resident = 0;
    if (statm >> size >> resident) return resident * static_cast<std::uint64_t>(sysconf(_SC_PAGESIZE));
#endif
    return 0;
}

std::uint64_t peak_rss_bytes() {
    rusage usage{};
    if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
#if defined(__APPLE__)
    return static_cast<std::uint64_t>(usage.ru_maxrss);
#else
    return static_cast<std::uint64_t>(usage.ru_maxrss) * 1024;
#endif
}

std::string BenchReport::time_text() const {
    return significant(time_mean * 1e3) + "ms ± " + significant(time_std * 1e3) + "ms";
}

std::string BenchReport::memory_text() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "PM: %.2f MiB, INC: %.2f MiB", mib(peak_memory), mib(incremental_memory));
    return buf;
}

BenchReport benchmark(const pipeline::PipelineConfig& config, const data::FeatureMatrix& X, const data::LabelVector& y,
                      std::size_t repetitions, std::uint64_t seed) {
    if (repetitions < 3) throw Error(ErrorCode::InvalidArgument, "benchmark needs at least 3 repetitions");
    if (y.size() != X.n_samples()) throw Error(ErrorCode::LengthMismatch, "labels and rows differ in length");
    const AugmentationIndex aug(X);
    const auto assignment = data::stratified_split(y.select(aug.originals), data::stroke_dataset_fractions(), seed);
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < aug.originals.size(); ++i) {
        if (assignment.split[i] == data::Split::Train) train.push_back(aug.originals[i]);
        else if (assignment.split[i] == data::Split::Test) test.push_back(aug.originals[i]);
    }
    train = aug.training_rows(train);
    const data::FeatureMatrix X_train = X.select_rows(train);
    const data::LabelVector y_train = y.select(train);
    const data::FeatureMatrix X_test = X.select_rows(test);

    BenchReport r;
    r.repetitions = repetitions;
    r.mechanism = "resident set: /proc/self/statm before, getrusage ru_maxrss after";
    const std::uint64_t before = current_rss_bytes();
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        const auto start = std::chrono::steady_clock::now();
        const auto model = pipeline::fit_pipeline(config, X_train, y_train, derive_seed(seed, 0));
        const auto pred = model.predict(X_test);
        const auto stop = std::chrono::steady_clock::now();
        if (pred.size() != X_test.n_samples()) throw Error(ErrorCode::Io, "benchmark prediction size mismatch");
        r.times.push_back(std::chrono::duration<double>(stop - start).count());
    }
    const Summary s = summarize(r.times);
    r.time_mean = s.mean;
    r.time_std = s.std;
    r.peak_memory = peak_rss_bytes();
    r.incremental_memory = r.peak_memory > before ? r.peak_memory - before : 0;
    return r;
}

void to_json(nlohmann::json& j, const BenchReport& r) {
    j = {{"repetitions", r.repetitions},
         {"times", r.times},
         {"time_mean", r.time_mean},
         {"time_std", r.time_std},
         {"peak_memory", r.peak_memory},
         {"incremental_memory", r.incremental_memory},
         {"mechanism", r.mechanism},
         {"time_text", r.time_text()},
         {"memory_text", r.memory_text()}};
}

void from_json(const nlohmann::json& j, BenchReport& r) {
    r.repetitions = j.at("repetitions").get<std::size_t>();
    r.times = j.at("times").get<std::vector<double>>();
    r.time_mean = j.at("time_mean").get<double>();
    r.time_std = j.at("time_std").get<double>();
    r.peak_memory = j.at("peak_memory").get<std::uint64_t>();
    r.incremental_memory = j.at("incremental_memory").get<std::uint64_t>();
    r.mechanism = j.at("mechanism").get<std::string>();
}

}  // namespace strokeml::eval
