#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "strokeml/data/dataset.hpp"
#include "strokeml/pipeline/config.hpp"

namespace strokeml::eval {

/// Timing and memory of one fit + predict cycle, repeated.
struct BenchReport {
    std::size_t repetitions = 0;
    std::vector<double> times;  // seconds
    double time_mean = 0.0;
    double time_std = 0.0;  // population
    std::uint64_t peak_memory = 0;         // bytes
    std::uint64_t incremental_memory = 0;  // bytes above the resident set before the first cycle
    std::string mechanism;

    /// "186ms ± 48.3ms" (three significant digits).
    std::string time_text() const;
    /// "PM: 1546.84 MiB, INC: 569.09 MiB"
    std::string memory_text() const;
};

/// Needs repetitions >= 3. Splits with the stroke dataset's shares from
/// `seed`, then times fit on train + predict on test. CSV loading is excluded.
BenchReport benchmark(const pipeline::PipelineConfig& config, const data::FeatureMatrix& X, const data::LabelVector& y,
                      std::size_t repetitions, std::uint64_t seed);

/// Resident set now and peak so far, in bytes; 0 where unsupported.
std::uint64_t current_rss_bytes();
std::uint64_t peak_rss_bytes();

void to_json(nlohmann::json& j, const BenchReport& r);
void from_json(const nlohmann::json& j, BenchReport& r);

}  // namespace strokeml::eval
