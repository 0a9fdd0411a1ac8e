#include "strokeml/error.hpp"

namespace strokeml {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::RaggedRow: return "RaggedRow";
        case ErrorCode::NonNumericValue: return "NonNumericValue";
        case ErrorCode::UnknownLabel: return "UnknownLabel";
        case ErrorCode::ClassTooSmall: return "ClassTooSmall";
        case ErrorCode::ClassSmallerThanK: return "ClassSmallerThanK";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::SingularScatter: return "SingularScatter";
        case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
        case ErrorCode::HyperparamOutOfRange: return "HyperparamOutOfRange";
        case ErrorCode::UnknownHyperparam: return "UnknownHyperparam";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyMatrix: return "EmptyMatrix";
        case ErrorCode::AbsentClass: return "AbsentClass";
        case ErrorCode::FractionTooSmall: return "FractionTooSmall";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::CorruptPayload: return "CorruptPayload";
        case ErrorCode::UnwritablePath: return "UnwritablePath";
        case ErrorCode::Io: return "Io";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

bool is_validation_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingColumn:
        case ErrorCode::RaggedRow:
        case ErrorCode::NonNumericValue:
        case ErrorCode::UnknownLabel:
        case ErrorCode::ClassTooSmall:
        case ErrorCode::ClassSmallerThanK:
        case ErrorCode::NonFiniteFeature:
        case ErrorCode::HyperparamOutOfRange:
        case ErrorCode::UnknownHyperparam:
        case ErrorCode::FractionTooSmall:
        case ErrorCode::InvalidConfig:
        case ErrorCode::VersionMismatch:
        case ErrorCode::CorruptPayload:
        case ErrorCode::InvalidArgument:
            return true;
        default:
            return false;
    }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

Error with_context(const Error& e, const std::string& context) { return Error(e.code(), context + ": " + e.detail()); }

CsvError::CsvError(ErrorCode code, std::size_t row, std::string column, const std::string& detail)
    : Error(code, "row " + std::to_string(row) + (column.empty() ? "" : ", column '" + column + "'") +
                      ": " + detail),
      row_(row),
      column_(std::move(column)) {}

}  // namespace strokeml
