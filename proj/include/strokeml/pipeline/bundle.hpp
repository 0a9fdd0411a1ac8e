#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "strokeml/pipeline/model.hpp"
#include "strokeml/pipeline/run.hpp"

namespace strokeml::pipeline {

inline constexpr int kBundleVersion = 1;
inline constexpr const char* kBundleFormat = "strokeml-bundle";

// A bundle file is one JSON header line followed by the payload bytes:
//
//   {"format":"strokeml-bundle","version":1,"payload_bytes":N,"sha256":"..."}
//   {"record":{...},"model":{...}}
//
// The checksum covers the payload bytes exactly as written.

struct Bundle {
    RunRecord record;
    FittedPipeline model;
};

/// Throws UnwritablePath.
void save_bundle(const RunRecord& record, const FittedPipeline& model, const std::filesystem::path& path);

/// Throws VersionMismatch (naming both versions) or CorruptPayload.
Bundle load_bundle(const std::filesystem::path& path);

std::string serialize_bundle(const RunRecord& record, const FittedPipeline& model);
Bundle parse_bundle(const std::string& bytes);

}  // namespace strokeml::pipeline
