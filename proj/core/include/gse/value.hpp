#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace gse {

/// A symbol of an enum-typed field. Distinct from a plain string so that a
/// conformed record remembers which strings were validated against variants.
struct EnumSymbol {
    std::string symbol;

    friend bool operator==(const EnumSymbol&, const EnumSymbol&) = default;
};

class Value;

/// Insertion-ordered map from field name to value. Equality ignores order.
class Object {
public:
    using Entry = std::pair<std::string, Value>;

    Object() = default;
    Object(std::initializer_list<Entry> entries);

    const Value* find(std::string_view key) const;
    Value* find(std::string_view key);
    bool contains(std::string_view key) const { return find(key) != nullptr; }

    /// Inserts or replaces; replacement keeps the original position.
    void set(std::string key, Value value);
    bool erase(std::string_view key);

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }
    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }

    friend bool operator==(const Object& lhs, const Object& rhs);

private:
    std::vector<Entry> entries_;
};

enum class ValueKind { Null, Boolean, Integer, Float, String, Enum, Object };

std::string_view to_string(ValueKind kind) noexcept;

/// A record value: null, boolean, 64-bit integer, double, string, enum symbol
/// or object.
class Value {
public:
    using Storage = std::variant<std::monostate, bool, std::int64_t, double, std::string, EnumSymbol, Object>;

    Value() = default;
    Value(std::nullptr_t) {}
    Value(bool b) : storage_(b) {}
    Value(int i) : storage_(static_cast<std::int64_t>(i)) {}
    Value(long i) : storage_(static_cast<std::int64_t>(i)) {}
    Value(long long i) : storage_(static_cast<std::int64_t>(i)) {}
    Value(double d) : storage_(d) {}
    Value(const char* s) : storage_(std::string(s)) {}
    Value(std::string s) : storage_(std::move(s)) {}
    Value(EnumSymbol e) : storage_(std::move(e)) {}
    Value(Object o) : storage_(std::move(o)) {}

    ValueKind kind() const noexcept { return static_cast<ValueKind>(storage_.index()); }
    bool is_null() const noexcept { return kind() == ValueKind::Null; }
    bool is_number() const noexcept { return kind() == ValueKind::Integer || kind() == ValueKind::Float; }
    /// Strings and enum symbols both carry text.
    bool is_text() const noexcept { return kind() == ValueKind::String || kind() == ValueKind::Enum; }

    bool as_bool() const { return std::get<bool>(storage_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(storage_); }
    double as_float() const { return std::get<double>(storage_); }
    const std::string& as_string() const { return std::get<std::string>(storage_); }
    const EnumSymbol& as_enum() const { return std::get<EnumSymbol>(storage_); }
    const Object& as_object() const { return std::get<Object>(storage_); }
    Object& as_object() { return std::get<Object>(storage_); }

    /// Numeric view of an integer or float.
    double to_double() const;
    /// Text of a string or enum symbol.
    const std::string& text() const;

    const Storage& storage() const noexcept { return storage_; }

    friend bool operator==(const Value& lhs, const Value& rhs);

private:
    Storage storage_;
};

/// Decimal text that parses back to the same double and always reads as a
/// float (has a '.', an exponent, or is non-finite).
std::string format_double(double d);

/// Untyped conversion from a document node: strings stay strings.
Value value_from_json(const nlohmann::ordered_json& node);
nlohmann::ordered_json value_to_json(const Value& value);

/// Single-line rendering used for records and error messages.
std::string to_display(const Value& value);

}  // namespace gse
