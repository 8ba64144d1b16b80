#include "gse/interpreter.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

#include "gse/error.hpp"

namespace gse {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void cast_fail(const Value& value, const FieldType& to) {
    throw TransformError(TransformErrorKind::CastError, "cannot cast " + std::string(to_string(value.kind())) + " " +
                                                            to_display(value) + " to " + describe(to));
}

std::string shortest(double d) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, ptr);
}

Value to_enum(const Value& value, const FieldType& to) {
    if (!to.has_variant(value.text())) {
        cast_fail(value, to);
    }
    return Value{EnumSymbol{value.text()}};
}

[[noreturn]] void conform_fail(const std::string& path, const std::string& message) {
    throw TransformError(TransformErrorKind::EvalError, "result does not conform: " + message,
                         path.empty() ? std::nullopt : std::optional(path));
}

std::string join(const std::string& prefix, const std::string& name) {
    return prefix.empty() ? name : prefix + "." + name;
}

Object conform_fields(const Object& input, const std::vector<Field>& fields, const std::string& prefix) {
    for (const auto& [key, value] : input) {
        bool declared = false;
        for (const auto& f : fields) {
            declared = declared || f.name == key;
        }
        if (!declared) {
            conform_fail(join(prefix, key), "undeclared field '" + join(prefix, key) + "'");
        }
    }
    Object out;
    for (const auto& f : fields) {
        const Value* v = input.find(f.name);
        const std::string path = join(prefix, f.name);
        if (v == nullptr || v->is_null()) {
            if (!f.optional) {
                conform_fail(path, "required field '" + path + "' is absent");
            }
            continue;
        }
        out.set(f.name, conform_value(*v, f.type, path));
    }
    return out;
}

/// Writes `value` at `path`, creating intermediate objects.
void write_path(Value& root, const FieldPath& path, Value value) {
    Value* current = &root;
    for (std::size_t i = 0; i + 1 < path.segments.size(); ++i) {
        Object& obj = current->as_object();
        Value* next = obj.find(path.segments[i]);
        if (next == nullptr || next->is_null()) {
            obj.set(path.segments[i], Value{Object{}});
            next = obj.find(path.segments[i]);
        } else if (next->kind() != ValueKind::Object) {
            throw TransformError(TransformErrorKind::EvalError, "cannot write below a non-object value", path.str());
        }
        current = next;
    }
    current->as_object().set(path.segments.back(), std::move(value));
}

/// Current working value at `path`; null when absent.
Value peek_path(const Value& root, const FieldPath& path) {
    const Value* current = &root;
    for (const auto& segment : path.segments) {
        if (current->kind() != ValueKind::Object) {
            return Value{};
        }
        current = current->as_object().find(segment);
        if (current == nullptr) {
            return Value{};
        }
    }
    return *current;
}

const Field& require_target(const Schema& target, const FieldPath& path) {
    const Field* f = target.find(path);
    if (f == nullptr) {
        throw TransformError(TransformErrorKind::PathError, "path is not declared by the target schema", path.str());
    }
    return *f;
}

Value typed_literal(const Value& literal, const Field& field, const FieldPath& path) {
    try {
        return check_literal(literal, field);
    } catch (const ParseError& e) {
        throw TransformError(TransformErrorKind::EvalError, "literal does not match target: " + e.detail(), path.str());
    }
}

}  // namespace

Value cast_value(const Value& value, const FieldType& to) {
    const ValueKind from = value.kind();
    switch (to.kind) {
        case TypeKind::Integer:
            if (from == ValueKind::Integer) {
                return value;
            }
            if (from == ValueKind::Float) {
                double d = value.as_float();
                if (!std::isfinite(d) || std::fabs(d - std::trunc(d)) >= 1e-9 || d < -9.2233720368547758e18 ||
                    d >= 9.2233720368547758e18) {
                    cast_fail(value, to);
                }
                return Value{static_cast<std::int64_t>(std::trunc(d))};
            }
            if (from == ValueKind::String) {
                std::string s = trim(value.as_string());
                std::int64_t i = 0;
                auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
                if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
                    cast_fail(value, to);
                }
                return Value{i};
            }
            break;
        case TypeKind::Float:
            if (from == ValueKind::Float) {
                return value;
            }
            if (from == ValueKind::Integer) {
                return Value{static_cast<double>(value.as_int())};
            }
            if (from == ValueKind::String) {
                std::string s = trim(value.as_string());
                double d = 0;
                auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
                if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(d)) {
                    cast_fail(value, to);
                }
                return Value{d};
            }
            break;
        case TypeKind::String:
            switch (from) {
                case ValueKind::String: return value;
                case ValueKind::Integer: return Value{std::to_string(value.as_int())};
                case ValueKind::Float: return Value{shortest(value.as_float())};
                case ValueKind::Boolean: return Value{std::string(value.as_bool() ? "true" : "false")};
                default: break;
            }
            break;
        case TypeKind::Boolean:
            if (from == ValueKind::Boolean) {
                return value;
            }
            if (from == ValueKind::String) {
                std::string s = trim(value.as_string());
                for (char& c : s) {
                    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                }
                if (s == "true" || s == "1") return Value{true};
                if (s == "false" || s == "0") return Value{false};
                cast_fail(value, to);
            }
            break;
        case TypeKind::Enum:
            if (from == ValueKind::String || from == ValueKind::Enum) {
                return to_enum(value, to);
            }
            break;
        case TypeKind::Object:
            if (from == ValueKind::Object) {
                return value;
            }
            break;
    }
    cast_fail(value, to);
}

Value conform_value(const Value& value, const FieldType& type, const std::string& path) {
    auto mismatch = [&]() {
        conform_fail(path, "'" + path + "' holds " + std::string(to_string(value.kind())) + " " + to_display(value) +
                               ", expected " + describe(type));
    };
    switch (type.kind) {
        case TypeKind::String:
            if (value.kind() == ValueKind::String) return value;
            break;
        case TypeKind::Integer:
            if (value.kind() == ValueKind::Integer) return value;
            break;
        case TypeKind::Float:
            if (value.kind() == ValueKind::Float) return value;
            if (value.kind() == ValueKind::Integer) return Value{static_cast<double>(value.as_int())};
            break;
        case TypeKind::Boolean:
            if (value.kind() == ValueKind::Boolean) return value;
            break;
        case TypeKind::Enum:
            if (value.is_text() && type.has_variant(value.text())) {
                return Value{EnumSymbol{value.text()}};
            }
            break;
        case TypeKind::Object:
            if (value.kind() == ValueKind::Object) {
                return Value{conform_fields(value.as_object(), type.fields, path)};
            }
            break;
    }
    mismatch();
    return value;
}

Value conform_record(const Value& record, const Schema& schema) {
    if (record.kind() != ValueKind::Object) {
        conform_fail("", "record is " + std::string(to_string(record.kind())) + ", not an object");
    }
    return Value{conform_fields(record.as_object(), schema.fields, "")};
}

Value transform(const StlProgram& program, const Value& record, const Schema& source, const Schema& target) {
    if (program.aborts()) {
        throw TransformError(TransformErrorKind::Abort,
                             "schemas do not describe the same entity" +
                                 (program.match.reason.empty() ? std::string() : ": " + program.match.reason));
    }
    Value working{Object{}};
    std::map<std::string, ExprPtr> functions;
    for (const auto& command : program.commands) {
        std::visit(
            [&](const auto& c) {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, cmd::Copy> || std::is_same_v<T, cmd::Rename>) {
                    write_path(working, c.target, read_path(record, c.source, &source));
                } else if constexpr (std::is_same_v<T, cmd::Cast>) {
                    Value v = read_path(record, c.source, &source);
                    write_path(working, c.target, v.is_null() ? v : cast_value(v, c.to));
                } else if constexpr (std::is_same_v<T, cmd::Add>) {
                    write_path(working, c.target, typed_literal(c.value, require_target(target, c.target), c.target));
                } else if constexpr (std::is_same_v<T, cmd::Default>) {
                    if (peek_path(working, c.target).is_null()) {
                        write_path(working, c.target,
                                   typed_literal(c.value, require_target(target, c.target), c.target));
                    }
                } else if constexpr (std::is_same_v<T, cmd::Delete>) {
                    // Documents an intentional drop.
                } else if constexpr (std::is_same_v<T, cmd::Missing>) {
                    throw TransformError(TransformErrorKind::MappingFailure,
                                         "no mapping produces target '" + c.target.str() + "'" +
                                             (c.reason.empty() ? std::string() : ": " + c.reason),
                                         c.target.str());
                } else if constexpr (std::is_same_v<T, cmd::Scale>) {
                    Value current = peek_path(working, c.target);
                    if (!current.is_null()) {
                        write_path(working, c.target, scale_number(current, c.factor));
                    }
                } else if constexpr (std::is_same_v<T, cmd::Shift>) {
                    Value current = peek_path(working, c.target);
                    if (!current.is_null()) {
                        write_path(working, c.target, shift_number(current, c.offset));
                    }
                } else if constexpr (std::is_same_v<T, cmd::Link>) {
                    Value current = peek_path(working, c.target);
                    if (current.is_null()) {
                        return;
                    }
                    if (!current.is_text()) {
                        throw TransformError(TransformErrorKind::EvalError,
                                             "LINK expects a symbol, got " + to_display(current), c.target.str());
                    }
                    const std::string* mapped = c.lookup(current.text());
                    if (mapped == nullptr) {
                        throw TransformError(TransformErrorKind::EvalError,
                                             "LINK has no entry for '" + current.text() + "' and no fallback",
                                             c.target.str());
                    }
                    write_path(working, c.target, Value{EnumSymbol{*mapped}});
                } else if constexpr (std::is_same_v<T, cmd::Gen>) {
                    functions[c.name] = c.expr;
                } else if constexpr (std::is_same_v<T, cmd::Apply>) {
                    ExprPtr fn = c.expr;
                    if (!fn) {
                        auto it = functions.find(c.name);
                        if (it != functions.end()) {
                            fn = it->second;
                        } else if (is_unary_builtin(c.name)) {
                            fn = std::make_shared<const Expr>(
                                Expr{ast::Call{c.name, {std::make_shared<const Expr>(Expr{ast::ValueRef{}})}}});
                        } else {
                            throw TransformError(TransformErrorKind::EvalError, "unresolved function '" + c.name + "'",
                                                 c.target.str());
                        }
                    }
                    Value input = read_path(record, c.source, &source);
                    write_path(working, c.target, input.is_null() ? input : eval_expr(*fn, input, record, &source));
                }
            },
            command);
    }
    return conform_record(working, target);
}

Value parse_record(std::string_view text, const Schema& schema) {
    Document doc = parse_document(text);
    Value raw;
    try {
        raw = value_from_json(doc);
    } catch (const std::exception& e) {
        throw ParseError(std::string("record: ") + e.what());
    }
    try {
        return conform_record(raw, schema);
    } catch (const TransformError& e) {
        throw ParseError("record does not conform to " + schema.subject + " v" + std::to_string(schema.version) +
                         ": " + e.detail());
    }
}

std::string serialize_record(const Value& record) {
    return value_to_json(record).dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

}  // namespace gse
