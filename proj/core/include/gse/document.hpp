#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace gse {

/// In-memory form of every structured-text document (schemas, mappings,
/// records, tool-call arguments). Key order is preserved.
using Document = nlohmann::ordered_json;

/// Parses a YAML document (block or flow; JSON is accepted as a subset).
///
/// Scalars resolve the YAML 1.2 core way: quoted scalars are always strings;
/// plain scalars become null (`null`, `~`, empty), booleans (`true`/`false`),
/// integers, floats, or strings. Duplicate map keys are rejected. Errors carry
/// a 1-based line and column.
Document parse_document(std::string_view text);

/// Emits block-style YAML that `parse_document` reads back to an equal
/// document. Small all-scalar containers are written in flow style.
std::string emit_document(const Document& doc);

/// Emits the document on one line in flow style (valid JSON and YAML).
std::string emit_flow(const Document& doc);

}  // namespace gse
