#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace strokeml {

enum class ErrorCode {
    // data
    MissingColumn,
    RaggedRow,
    NonNumericValue,
    UnknownLabel,
    ClassTooSmall,
    ClassSmallerThanK,
    // reduce / learn
    DimensionMismatch,
    SingularScatter,
    NonFiniteFeature,
    HyperparamOutOfRange,
    UnknownHyperparam,
    // eval
    LengthMismatch,
    EmptyMatrix,
    AbsentClass,
    FractionTooSmall,
    // pipeline
    InvalidConfig,
    VersionMismatch,
    CorruptPayload,
    UnwritablePath,
    Io,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by bad user input (files, configs, parameters)
/// rather than failures during computation. The CLI maps these to exit code 1.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    /// The message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

/// Same code, message prefixed with `context`.
Error with_context(const Error& e, const std::string& context);

/// Error raised while reading a feature CSV. `row` is the 1-based data row
/// (the header is not counted); 0 means the header itself.
class CsvError : public Error {
public:
    CsvError(ErrorCode code, std::size_t row, std::string column, const std::string& detail);

    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

}  // namespace strokeml
