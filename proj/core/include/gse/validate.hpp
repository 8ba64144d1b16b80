#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gse/schema.hpp"
#include "gse/stl.hpp"

namespace gse {

/// A validation finding. `code` is one of: unknown-source-path,
/// unknown-target-path, uncovered-target, conflict, unconsumed-source,
/// transform-order, type, unresolved-fn, abort-with-commands, nullable,
/// duplicate-rename, protocol.
struct Diagnostic {
    std::string code;
    std::string message;
    std::optional<std::string> path;
    /// 0-based index into StlProgram::commands.
    std::optional<std::size_t> command_index;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// `[code] path: message (command N)`, with N 1-based.
std::string format_diagnostic(const Diagnostic& diagnostic);
Document diagnostic_to_document(const Diagnostic& diagnostic);
Diagnostic diagnostic_from_document(const Document& doc);

/// Static checks of a program against its schema pair. An empty result means
/// the program is well-typed and complete: every target field has exactly one
/// producer, every source field is consumed, value transforms follow their
/// producer, and every runtime value that reaches a target conforms to it.
/// Deterministic; diagnostics come out in command order, then coverage order.
std::vector<Diagnostic> validate_program(const StlProgram& program, const Schema& source, const Schema& target);

/// Runtime CAST support for a (from, to) kind pair.
bool castable(TypeKind from, TypeKind to) noexcept;

/// Whether a value of `from` can be stored into `to` without conversion.
/// Enum variants must be a subset unless `relabel_enum` (a LINK follows).
/// On failure `why` explains the mismatch.
bool assignable(const FieldType& from, const FieldType& to, bool relabel_enum, std::string* why = nullptr);

}  // namespace gse
