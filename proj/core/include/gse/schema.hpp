#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gse/document.hpp"
#include "gse/value.hpp"

namespace gse {

enum class TypeKind { String, Integer, Float, Boolean, Enum, Object };

std::string_view to_string(TypeKind kind) noexcept;
std::optional<TypeKind> parse_type_kind(std::string_view name) noexcept;
bool is_numeric(TypeKind kind) noexcept;

struct Field;

/// Type of a field. `variants` is populated only for enums, `fields` only for
/// objects.
struct FieldType {
    TypeKind kind = TypeKind::String;
    std::vector<std::string> variants;
    std::vector<Field> fields;

    static FieldType scalar(TypeKind kind);
    static FieldType enumeration(std::vector<std::string> variants);
    static FieldType object(std::vector<Field> fields);

    const Field* find_field(std::string_view name) const;
    bool has_variant(std::string_view symbol) const;

    friend bool operator==(const FieldType& lhs, const FieldType& rhs);
};

struct Field {
    std::string name;
    FieldType type;
    std::optional<std::string> unit;
    std::optional<std::string> description;
    bool optional = false;
    std::optional<Value> default_value;

    /// Absent values read as null: optional and without a default.
    bool nullable() const noexcept { return optional && !default_value; }

    friend bool operator==(const Field&, const Field&) = default;
};

inline bool operator==(const FieldType& lhs, const FieldType& rhs) {
    return lhs.kind == rhs.kind && lhs.variants == rhs.variants && lhs.fields == rhs.fields;
}

/// Dot-separated path into nested object fields.
struct FieldPath {
    std::vector<std::string> segments;

    /// Throws ParseError when empty or a segment is not an identifier.
    static FieldPath parse(std::string_view text);

    std::string str() const;
    bool is_prefix_of(const FieldPath& other) const;

    friend auto operator<=>(const FieldPath&, const FieldPath&) = default;
};

bool is_identifier(std::string_view text) noexcept;

struct Schema {
    std::string subject;
    std::int64_t version = 1;
    std::optional<std::string> doc;
    std::vector<Field> fields;

    const Field* find_field(std::string_view name) const;
    /// Resolves a nested path; nullptr when any segment is missing or a
    /// non-object is traversed.
    const Field* find(const FieldPath& path) const;
    /// True when some field along the path is optional without a default.
    bool nullable(const FieldPath& path) const;

    friend bool operator==(const Schema&, const Schema&) = default;
};

struct SchemaId {
    std::uint32_t id = 0;
    std::uint64_t fingerprint = 0;

    friend bool operator==(const SchemaId&, const SchemaId&) = default;
};

enum class CompatibilityMode { None, Backward, Forward, Full, Semantic };

std::string_view to_string(CompatibilityMode mode) noexcept;
std::optional<CompatibilityMode> parse_compatibility_mode(std::string_view name) noexcept;

/// Parses the schema document format. Throws ParseError.
Schema parse_schema(std::string_view text);
Schema schema_from_document(const Document& doc);
Document schema_to_document(const Schema& schema);
std::string serialize_schema(const Schema& schema);

/// Type as written in documents: a bare kind name for scalars, a map with
/// `type` plus `variants`/`fields` otherwise.
FieldType field_type_from_document(const Document& doc);
Document field_type_to_document(const FieldType& type);
std::string describe(const FieldType& type);

/// Checks a literal against a type, converting strings to enum symbols and
/// widening integers to floats. Throws ParseError on mismatch.
Value check_literal(const Value& literal, const Field& field);

/// Compact, key-sorted, whitespace-free serialization that fingerprints hash.
std::string canonical_form(const Schema& schema);
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::uint64_t fingerprint(const Schema& schema);
/// Fingerprint that ignores `version`, used for idempotent registration.
std::uint64_t content_fingerprint(const Schema& schema);

struct CompatViolation {
    std::string path;
    std::string rule;
    std::string message;

    friend bool operator==(const CompatViolation&, const CompatViolation&) = default;
};

struct CompatReport {
    CompatibilityMode mode = CompatibilityMode::None;
    std::vector<CompatViolation> violations;

    bool compatible() const noexcept { return violations.empty(); }
};

/// Classic registry compatibility between consecutive versions.
/// BACKWARD: readers of `next` can read data written with `old`.
/// FORWARD: readers of `old` can read data written with `next`.
/// FULL: both. NONE: always compatible. SEMANTIC is rejected with
/// std::invalid_argument; it is decided by mapping creation instead.
CompatReport check_structural_compat(const Schema& old, const Schema& next, CompatibilityMode mode);

}  // namespace gse
