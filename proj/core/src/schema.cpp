#include "gse/schema.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <stdexcept>

#include "gse/error.hpp"

namespace gse {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::string expect_string(const Document& node, const std::string& what) {
    if (!node.is_string()) {
        throw ParseError(what + " must be a string");
    }
    return node.get<std::string>();
}

std::optional<std::string> optional_string(const Document& map, const char* key, const std::string& where) {
    auto it = map.find(key);
    if (it == map.end() || it->is_null()) {
        return std::nullopt;
    }
    return expect_string(*it, where + "." + key);
}

void reject_unknown_keys(const Document& map, std::initializer_list<const char*> allowed, const std::string& where) {
    for (auto it = map.begin(); it != map.end(); ++it) {
        bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
        if (!known) {
            throw ParseError(where + ": unknown key '" + it.key() + "'");
        }
    }
}

std::vector<Field> fields_from_document(const Document& list, const std::string& where);

Field field_from_document(const Document& node, const std::string& where) {
    if (!node.is_object()) {
        throw ParseError(where + ": field entry must be a map");
    }
    reject_unknown_keys(node, {"name", "type", "unit", "description", "optional", "default", "variants", "fields"},
                        where);
    Field field;
    auto name = node.find("name");
    if (name == node.end()) {
        throw ParseError(where + ": field is missing 'name'");
    }
    field.name = expect_string(*name, where + ".name");
    if (!is_identifier(field.name)) {
        throw ParseError(where + ": invalid field name '" + field.name + "'");
    }
    const std::string here = where + "." + field.name;
    auto type = node.find("type");
    if (type == node.end()) {
        throw ParseError(here + ": field is missing 'type'");
    }
    auto kind = parse_type_kind(expect_string(*type, here + ".type"));
    if (!kind) {
        throw ParseError(here + ": unknown type kind '" + type->get<std::string>() + "'");
    }
    field.type.kind = *kind;
    auto variants = node.find("variants");
    auto nested = node.find("fields");
    if (*kind == TypeKind::Enum) {
        if (variants == node.end() || !variants->is_array()) {
            throw ParseError(here + ": enum requires a 'variants' list");
        }
        std::set<std::string> seen;
        for (const auto& v : *variants) {
            auto symbol = expect_string(v, here + ".variants[]");
            if (!seen.insert(symbol).second) {
                throw ParseError(here + ": duplicate enum variant '" + symbol + "'");
            }
            field.type.variants.push_back(symbol);
        }
        if (field.type.variants.empty()) {
            throw ParseError(here + ": enum variants must be non-empty");
        }
    } else if (variants != node.end()) {
        throw ParseError(here + ": 'variants' is only valid for enum fields");
    }
    if (*kind == TypeKind::Object) {
        if (nested == node.end() || !nested->is_array()) {
            throw ParseError(here + ": object requires a 'fields' list");
        }
        field.type.fields = fields_from_document(*nested, here);
    } else if (nested != node.end()) {
        throw ParseError(here + ": 'fields' is only valid for object fields");
    }
    field.unit = optional_string(node, "unit", here);
    field.description = optional_string(node, "description", here);
    if (auto opt = node.find("optional"); opt != node.end()) {
        if (!opt->is_boolean()) {
            throw ParseError(here + ".optional must be a boolean");
        }
        field.optional = opt->get<bool>();
    }
    if (auto def = node.find("default"); def != node.end()) {
        Value literal;
        try {
            literal = value_from_json(*def);
        } catch (const std::invalid_argument& e) {
            throw ParseError(here + ".default: " + e.what());
        }
        try {
            field.default_value = check_literal(literal, field);
        } catch (const ParseError& e) {
            throw ParseError(here + ": default does not match type: " + e.detail());
        }
        if (field.default_value->is_null()) {
            field.default_value.reset();
        }
    }
    return field;
}

std::vector<Field> fields_from_document(const Document& list, const std::string& where) {
    if (!list.is_array()) {
        throw ParseError(where + ": 'fields' must be a list");
    }
    std::vector<Field> fields;
    std::set<std::string> seen;
    for (const auto& entry : list) {
        Field f = field_from_document(entry, where);
        if (!seen.insert(f.name).second) {
            throw ParseError(where + ": duplicate field name '" + f.name + "'");
        }
        fields.push_back(std::move(f));
    }
    return fields;
}

Document field_to_document(const Field& field) {
    Document out = Document::object();
    out["name"] = field.name;
    out["type"] = std::string(to_string(field.type.kind));
    if (field.type.kind == TypeKind::Enum) {
        out["variants"] = field.type.variants;
    }
    if (field.type.kind == TypeKind::Object) {
        Document nested = Document::array();
        for (const auto& f : field.type.fields) {
            nested.push_back(field_to_document(f));
        }
        out["fields"] = std::move(nested);
    }
    if (field.unit) {
        out["unit"] = *field.unit;
    }
    if (field.description) {
        out["description"] = *field.description;
    }
    if (field.optional) {
        out["optional"] = true;
    }
    if (field.default_value) {
        out["default"] = value_to_json(*field.default_value);
    }
    return out;
}

void canonical(const Document& node, std::string& out) {
    if (node.is_object()) {
        std::map<std::string, const Document*> sorted;
        for (auto it = node.begin(); it != node.end(); ++it) {
            sorted.emplace(it.key(), &it.value());
        }
        out += '{';
        bool first = true;
        for (const auto& [k, v] : sorted) {
            if (!first) {
                out += ',';
            }
            first = false;
            out += emit_flow(Document(k));
            out += ':';
            canonical(*v, out);
        }
        out += '}';
    } else if (node.is_array()) {
        out += '[';
        bool first = true;
        for (const auto& item : node) {
            if (!first) {
                out += ',';
            }
            first = false;
            canonical(item, out);
        }
        out += ']';
    } else {
        out += emit_flow(node);
    }
}

bool same_type(const FieldType& a, const FieldType& b) {
    return a.kind == b.kind;
}

void add_violation(CompatReport& report, const std::string& path, const char* rule, std::string message) {
    CompatViolation v{path, rule, std::move(message)};
    if (std::find(report.violations.begin(), report.violations.end(), v) == report.violations.end()) {
        report.violations.push_back(std::move(v));
    }
}

// `writer` produced the data, `reader` consumes it.
void check_reader(const std::vector<Field>& writer, const std::vector<Field>& reader, const std::string& prefix,
                  const char* rule, CompatReport& report) {
    auto find = [](const std::vector<Field>& fs, const std::string& name) -> const Field* {
        for (const auto& f : fs) {
            if (f.name == name) {
                return &f;
            }
        }
        return nullptr;
    };
    for (const auto& r : reader) {
        const std::string path = prefix.empty() ? r.name : prefix + "." + r.name;
        const Field* w = find(writer, r.name);
        if (w == nullptr) {
            if (!r.optional && !r.default_value) {
                add_violation(report, path, rule,
                              "field '" + path + "' is required by the reader but absent from the writer");
            }
            continue;
        }
        if (!same_type(w->type, r.type)) {
            add_violation(report, path, rule,
                          "field '" + path + "' changes type from " + describe(w->type) + " to " + describe(r.type));
            continue;
        }
        if (r.type.kind == TypeKind::Enum) {
            for (const auto& symbol : w->type.variants) {
                if (!r.type.has_variant(symbol)) {
                    add_violation(report, path, rule,
                                  "enum '" + path + "' drops variant '" + symbol + "' still written by the writer");
                }
            }
        }
        if (r.type.kind == TypeKind::Object) {
            check_reader(w->type.fields, r.type.fields, path, rule, report);
        }
        if (w->nullable() && !r.optional && !r.default_value) {
            add_violation(report, path, rule,
                          "field '" + path + "' may be absent in written data but is required by the reader");
        }
    }
}

}  // namespace

std::string_view to_string(TypeKind kind) noexcept {
    switch (kind) {
        case TypeKind::String: return "string";
        case TypeKind::Integer: return "integer";
        case TypeKind::Float: return "float";
        case TypeKind::Boolean: return "boolean";
        case TypeKind::Enum: return "enum";
        case TypeKind::Object: return "object";
    }
    return "string";
}

std::optional<TypeKind> parse_type_kind(std::string_view name) noexcept {
    if (name == "string") return TypeKind::String;
    if (name == "integer") return TypeKind::Integer;
    if (name == "float") return TypeKind::Float;
    if (name == "boolean") return TypeKind::Boolean;
    if (name == "enum") return TypeKind::Enum;
    if (name == "object") return TypeKind::Object;
    return std::nullopt;
}

bool is_numeric(TypeKind kind) noexcept {
    return kind == TypeKind::Integer || kind == TypeKind::Float;
}

FieldType FieldType::scalar(TypeKind kind) {
    FieldType t;
    t.kind = kind;
    return t;
}

FieldType FieldType::enumeration(std::vector<std::string> variants) {
    FieldType t;
    t.kind = TypeKind::Enum;
    t.variants = std::move(variants);
    return t;
}

FieldType FieldType::object(std::vector<Field> fields) {
    FieldType t;
    t.kind = TypeKind::Object;
    t.fields = std::move(fields);
    return t;
}

const Field* FieldType::find_field(std::string_view name) const {
    for (const auto& f : fields) {
        if (f.name == name) {
            return &f;
        }
    }
    return nullptr;
}

bool FieldType::has_variant(std::string_view symbol) const {
    return std::find(variants.begin(), variants.end(), symbol) != variants.end();
}

bool is_identifier(std::string_view text) noexcept {
    if (text.empty()) {
        return false;
    }
    auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    if (!alpha(text.front())) {
        return false;
    }
    return std::all_of(text.begin(), text.end(), [&](char c) { return alpha(c) || digit(c); });
}

FieldPath FieldPath::parse(std::string_view text) {
    FieldPath path;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = text.find('.', start);
        std::string_view segment = text.substr(start, dot == std::string_view::npos ? text.npos : dot - start);
        if (!is_identifier(segment)) {
            throw ParseError("invalid field path '" + std::string(text) + "'");
        }
        path.segments.emplace_back(segment);
        if (dot == std::string_view::npos) {
            break;
        }
        start = dot + 1;
    }
    return path;
}

std::string FieldPath::str() const {
    std::string out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (i > 0) {
            out += '.';
        }
        out += segments[i];
    }
    return out;
}

bool FieldPath::is_prefix_of(const FieldPath& other) const {
    if (segments.size() > other.segments.size()) {
        return false;
    }
    return std::equal(segments.begin(), segments.end(), other.segments.begin());
}

const Field* Schema::find_field(std::string_view name) const {
    for (const auto& f : fields) {
        if (f.name == name) {
            return &f;
        }
    }
    return nullptr;
}

const Field* Schema::find(const FieldPath& path) const {
    const std::vector<Field>* level = &fields;
    const Field* found = nullptr;
    for (const auto& segment : path.segments) {
        if (level == nullptr) {
            return nullptr;
        }
        found = nullptr;
        for (const auto& f : *level) {
            if (f.name == segment) {
                found = &f;
                break;
            }
        }
        if (found == nullptr) {
            return nullptr;
        }
        level = found->type.kind == TypeKind::Object ? &found->type.fields : nullptr;
    }
    return found;
}

bool Schema::nullable(const FieldPath& path) const {
    const std::vector<Field>* level = &fields;
    for (const auto& segment : path.segments) {
        const Field* found = nullptr;
        for (const auto& f : *level) {
            if (f.name == segment) {
                found = &f;
                break;
            }
        }
        if (found == nullptr) {
            return false;
        }
        if (found->nullable()) {
            return true;
        }
        level = &found->type.fields;
    }
    return false;
}

std::string_view to_string(CompatibilityMode mode) noexcept {
    switch (mode) {
        case CompatibilityMode::None: return "NONE";
        case CompatibilityMode::Backward: return "BACKWARD";
        case CompatibilityMode::Forward: return "FORWARD";
        case CompatibilityMode::Full: return "FULL";
        case CompatibilityMode::Semantic: return "SEMANTIC";
    }
    return "NONE";
}

std::optional<CompatibilityMode> parse_compatibility_mode(std::string_view name) noexcept {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    if (upper == "NONE") return CompatibilityMode::None;
    if (upper == "BACKWARD") return CompatibilityMode::Backward;
    if (upper == "FORWARD") return CompatibilityMode::Forward;
    if (upper == "FULL") return CompatibilityMode::Full;
    if (upper == "SEMANTIC") return CompatibilityMode::Semantic;
    return std::nullopt;
}

Schema parse_schema(std::string_view text) {
    return schema_from_document(parse_document(text));
}

Schema schema_from_document(const Document& doc) {
    if (!doc.is_object()) {
        throw ParseError("schema document must be a map");
    }
    reject_unknown_keys(doc, {"subject", "version", "doc", "fields"}, "schema");
    Schema schema;
    auto subject = doc.find("subject");
    if (subject == doc.end()) {
        throw ParseError("schema is missing 'subject'");
    }
    schema.subject = expect_string(*subject, "subject");
    if (schema.subject.empty()) {
        throw ParseError("subject must be non-empty");
    }
    auto version = doc.find("version");
    if (version == doc.end() || !version->is_number_integer()) {
        throw ParseError("schema requires an integer 'version'");
    }
    schema.version = version->get<std::int64_t>();
    if (schema.version < 1) {
        throw ParseError("version must be >= 1");
    }
    schema.doc = optional_string(doc, "doc", "schema");
    auto fields = doc.find("fields");
    if (fields != doc.end() && !fields->is_null()) {
        schema.fields = fields_from_document(*fields, schema.subject);
    }
    return schema;
}

Document schema_to_document(const Schema& schema) {
    Document out = Document::object();
    out["subject"] = schema.subject;
    out["version"] = schema.version;
    if (schema.doc) {
        out["doc"] = *schema.doc;
    }
    Document fields = Document::array();
    for (const auto& f : schema.fields) {
        fields.push_back(field_to_document(f));
    }
    out["fields"] = std::move(fields);
    return out;
}

std::string serialize_schema(const Schema& schema) {
    return emit_document(schema_to_document(schema));
}

FieldType field_type_from_document(const Document& doc) {
    if (doc.is_string()) {
        auto kind = parse_type_kind(doc.get<std::string>());
        if (!kind) {
            throw ParseError("unknown type kind '" + doc.get<std::string>() + "'");
        }
        if (*kind == TypeKind::Enum || *kind == TypeKind::Object) {
            throw ParseError(std::string(to_string(*kind)) + " type requires a map with 'variants' or 'fields'");
        }
        return FieldType::scalar(*kind);
    }
    if (!doc.is_object()) {
        throw ParseError("type must be a kind name or a map");
    }
    Document as_field = doc;
    as_field["name"] = "type";
    return field_from_document(as_field, "type").type;
}

Document field_type_to_document(const FieldType& type) {
    if (type.kind != TypeKind::Enum && type.kind != TypeKind::Object) {
        return std::string(to_string(type.kind));
    }
    Field f{"type", type, {}, {}, false, {}};
    Document out = field_to_document(f);
    out.erase("name");
    return out;
}

std::string describe(const FieldType& type) {
    std::string out(to_string(type.kind));
    if (type.kind == TypeKind::Enum) {
        out += "{";
        for (std::size_t i = 0; i < type.variants.size(); ++i) {
            out += (i ? "," : "") + type.variants[i];
        }
        out += "}";
    }
    return out;
}

Value check_literal(const Value& literal, const Field& field) {
    if (literal.is_null()) {
        if (!field.optional) {
            throw ParseError("null is not allowed for required field '" + field.name + "'");
        }
        return literal;
    }
    const FieldType& type = field.type;
    switch (type.kind) {
        case TypeKind::String:
            if (literal.kind() == ValueKind::String) return literal;
            break;
        case TypeKind::Integer:
            if (literal.kind() == ValueKind::Integer) return literal;
            break;
        case TypeKind::Float:
            if (literal.kind() == ValueKind::Float) return literal;
            if (literal.kind() == ValueKind::Integer) return Value{static_cast<double>(literal.as_int())};
            break;
        case TypeKind::Boolean:
            if (literal.kind() == ValueKind::Boolean) return literal;
            break;
        case TypeKind::Enum:
            if (literal.is_text()) {
                if (!type.has_variant(literal.text())) {
                    throw ParseError("'" + literal.text() + "' is not a variant of " + describe(type));
                }
                return Value{EnumSymbol{literal.text()}};
            }
            break;
        case TypeKind::Object: {
            if (literal.kind() != ValueKind::Object) break;
            Object out;
            for (const auto& [k, v] : literal.as_object()) {
                if (type.find_field(k) == nullptr) {
                    throw ParseError("unexpected field '" + k + "'");
                }
            }
            for (const auto& sub : type.fields) {
                const Value* v = literal.as_object().find(sub.name);
                if (v == nullptr) {
                    if (!sub.optional && !sub.default_value) {
                        throw ParseError("missing required field '" + sub.name + "'");
                    }
                    continue;
                }
                out.set(sub.name, check_literal(*v, sub));
            }
            return Value{std::move(out)};
        }
    }
    throw ParseError("expected " + describe(type) + ", got " + std::string(to_string(literal.kind())) + " " +
                     to_display(literal));
}

std::string canonical_form(const Schema& schema) {
    std::string out;
    canonical(schema_to_document(schema), out);
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t hash = kFnvOffset;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= kFnvPrime;
    }
    return hash;
}

std::uint64_t fingerprint(const Schema& schema) {
    return fnv1a64(canonical_form(schema));
}

std::uint64_t content_fingerprint(const Schema& schema) {
    Document doc = schema_to_document(schema);
    doc.erase("version");
    std::string out;
    canonical(doc, out);
    return fnv1a64(out);
}

CompatReport check_structural_compat(const Schema& old, const Schema& next, CompatibilityMode mode) {
    CompatReport report;
    report.mode = mode;
    switch (mode) {
        case CompatibilityMode::None: break;
        case CompatibilityMode::Backward: check_reader(old.fields, next.fields, "", "BACKWARD", report); break;
        case CompatibilityMode::Forward: check_reader(next.fields, old.fields, "", "FORWARD", report); break;
        case CompatibilityMode::Full:
            check_reader(old.fields, next.fields, "", "BACKWARD", report);
            check_reader(next.fields, old.fields, "", "FORWARD", report);
            break;
        case CompatibilityMode::Semantic:
            throw std::invalid_argument("SEMANTIC compatibility is decided at mapping time");
    }
    return report;
}

}  // namespace gse
