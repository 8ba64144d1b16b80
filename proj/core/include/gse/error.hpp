#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gse {

/// Base of every exception raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document, expression or path. Carries a 1-based
/// line/column when the failure can be located in the source text.
class ParseError : public Error {
public:
    explicit ParseError(std::string message, std::optional<std::size_t> line = std::nullopt,
                        std::optional<std::size_t> column = std::nullopt);

    const std::string& detail() const noexcept { return detail_; }
    std::optional<std::size_t> line() const noexcept { return line_; }
    std::optional<std::size_t> column() const noexcept { return column_; }

private:
    std::string detail_;
    std::optional<std::size_t> line_;
    std::optional<std::size_t> column_;
};

enum class TransformErrorKind { Abort, MappingFailure, CastError, EvalError, PathError };

std::string_view to_string(TransformErrorKind kind) noexcept;

/// Raised on-path while executing a mapping against a record.
class TransformError : public Error {
public:
    TransformError(TransformErrorKind kind, std::string detail, std::optional<std::string> path = std::nullopt);

    TransformErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }
    const std::optional<std::string>& path() const noexcept { return path_; }

private:
    TransformErrorKind kind_;
    std::string detail_;
    std::optional<std::string> path_;
};

/// A backend refused to compile a program.
class CompileError : public Error {
public:
    using Error::Error;
};

/// The model client broke the tool-call contract (unknown tool, bad arguments).
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// The model endpoint could not be reached or answered with a transport failure.
class TransportError : public Error {
public:
    using Error::Error;
};

}  // namespace gse
