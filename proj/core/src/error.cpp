#include "gse/error.hpp"

namespace gse {

namespace {

std::string locate(const std::string& message, std::optional<std::size_t> line, std::optional<std::size_t> column) {
    if (!line) {
        return message;
    }
    std::string out = "line " + std::to_string(*line);
    if (column) {
        out += ", column " + std::to_string(*column);
    }
    return out + ": " + message;
}

std::string describe(TransformErrorKind kind, const std::string& detail, const std::optional<std::string>& path) {
    std::string out(to_string(kind));
    if (path) {
        out += " at '" + *path + "'";
    }
    return out + ": " + detail;
}

}  // namespace

ParseError::ParseError(std::string message, std::optional<std::size_t> line, std::optional<std::size_t> column)
    : Error(locate(message, line, column)), detail_(std::move(message)), line_(line), column_(column) {}

std::string_view to_string(TransformErrorKind kind) noexcept {
    switch (kind) {
        case TransformErrorKind::Abort: return "Abort";
        case TransformErrorKind::MappingFailure: return "MappingFailure";
        case TransformErrorKind::CastError: return "CastError";
        case TransformErrorKind::EvalError: return "EvalError";
        case TransformErrorKind::PathError: return "PathError";
    }
    return "EvalError";
}

TransformError::TransformError(TransformErrorKind kind, std::string detail, std::optional<std::string> path)
    : Error(describe(kind, detail, path)), kind_(kind), detail_(std::move(detail)), path_(std::move(path)) {}

}  // namespace gse
