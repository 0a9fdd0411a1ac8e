#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "strokeml/data/dataset.hpp"

namespace strokeml::data {

// Feature CSV contract:
//
//   id,label,split,f0,f1,...,f{d-1}
//
// `split` is one of train/test/val or empty and the column itself may be
// omitted. Labels are class names (case-insensitive) or integer class indices.

struct LoadOptions {
    /// Declared class set. Empty means Normal/Ischemic/Hemorrhagic unless
    /// `infer_classes` is set.
    std::vector<std::string> class_names;
    /// Collect the class set from the file, sorted lexicographically.
    bool infer_classes = false;
};

struct LoadedFeatures {
    FeatureMatrix X;
    LabelVector y;
    std::optional<SplitAssignment> split;
};

LoadedFeatures load_features(const std::filesystem::path& path, const LoadOptions& options = {});
LoadedFeatures read_features(std::istream& in, const LoadOptions& options = {});

/// Writes with shortest round-trip float formatting, so reloading is exact.
void write_features(const std::filesystem::path& path, const FeatureMatrix& X, const LabelVector& y,
                    const std::optional<SplitAssignment>& split = std::nullopt);
void write_features(std::ostream& out, const FeatureMatrix& X, const LabelVector& y,
                    const std::optional<SplitAssignment>& split = std::nullopt);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace strokeml::data
