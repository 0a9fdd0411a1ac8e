#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "strokeml/data/dataset.hpp"

namespace strokeml::io {

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws Error(CorruptPayload) on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Doubles as base64 of their little-endian IEEE-754 bytes.
std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(std::string_view text);

/// {"rows": r, "cols": c, "data": "<base64 f64le>"}
nlohmann::json matrix_to_json(std::size_t rows, std::size_t cols, std::span<const double> values);
nlohmann::json matrix_to_json(const data::RowMatrix& m);
data::RowMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json vector_to_json(std::span<const double> values);
std::vector<double> vector_from_json(const nlohmann::json& j);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace strokeml::io
