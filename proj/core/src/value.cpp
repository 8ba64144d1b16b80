#include "gse/value.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace gse {

Object::Object(std::initializer_list<Entry> entries) {
    for (const auto& [k, v] : entries) {
        set(k, v);
    }
}

const Value* Object::find(std::string_view key) const {
    for (const auto& entry : entries_) {
        if (entry.first == key) {
            return &entry.second;
        }
    }
    return nullptr;
}

Value* Object::find(std::string_view key) {
    for (auto& entry : entries_) {
        if (entry.first == key) {
            return &entry.second;
        }
    }
    return nullptr;
}

void Object::set(std::string key, Value value) {
    if (Value* existing = find(key)) {
        *existing = std::move(value);
        return;
    }
    entries_.emplace_back(std::move(key), std::move(value));
}

bool Object::erase(std::string_view key) {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.first == key; });
    if (it == entries_.end()) {
        return false;
    }
    entries_.erase(it);
    return true;
}

bool operator==(const Object& lhs, const Object& rhs) {
    if (lhs.size() != rhs.size()) {
        return false;
    }
    for (const auto& [key, value] : lhs) {
        const Value* other = rhs.find(key);
        if (other == nullptr || !(*other == value)) {
            return false;
        }
    }
    return true;
}

std::string_view to_string(ValueKind kind) noexcept {
    switch (kind) {
        case ValueKind::Null: return "null";
        case ValueKind::Boolean: return "boolean";
        case ValueKind::Integer: return "integer";
        case ValueKind::Float: return "float";
        case ValueKind::String: return "string";
        case ValueKind::Enum: return "enum";
        case ValueKind::Object: return "object";
    }
    return "null";
}

double Value::to_double() const {
    if (kind() == ValueKind::Integer) {
        return static_cast<double>(as_int());
    }
    return as_float();
}

const std::string& Value::text() const {
    if (kind() == ValueKind::Enum) {
        return as_enum().symbol;
    }
    return as_string();
}

bool operator==(const Value& lhs, const Value& rhs) {
    return lhs.storage_ == rhs.storage_;
}

std::string format_double(double d) {
    if (std::isnan(d)) {
        return "nan";
    }
    if (std::isinf(d)) {
        return d > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    if (ec != std::errc{}) {
        throw std::runtime_error("format_double: conversion failed");
    }
    std::string out(buf, end);
    if (out.find_first_of(".eE") == std::string::npos) {
        out += ".0";
    }
    return out;
}

Value value_from_json(const nlohmann::ordered_json& node) {
    using nlohmann::ordered_json;
    switch (node.type()) {
        case ordered_json::value_t::null: return Value{};
        case ordered_json::value_t::boolean: return Value{node.get<bool>()};
        case ordered_json::value_t::number_integer: return Value{node.get<std::int64_t>()};
        case ordered_json::value_t::number_unsigned: {
            auto u = node.get<std::uint64_t>();
            if (u > static_cast<std::uint64_t>(INT64_MAX)) {
                return Value{static_cast<double>(u)};
            }
            return Value{static_cast<std::int64_t>(u)};
        }
        case ordered_json::value_t::number_float: return Value{node.get<double>()};
        case ordered_json::value_t::string: return Value{node.get<std::string>()};
        case ordered_json::value_t::object: {
            Object obj;
            for (auto it = node.begin(); it != node.end(); ++it) {
                obj.set(it.key(), value_from_json(it.value()));
            }
            return Value{std::move(obj)};
        }
        default: throw std::invalid_argument("lists are not record values");
    }
}

nlohmann::ordered_json value_to_json(const Value& value) {
    using nlohmann::ordered_json;
    switch (value.kind()) {
        case ValueKind::Null: return nullptr;
        case ValueKind::Boolean: return value.as_bool();
        case ValueKind::Integer: return value.as_int();
        case ValueKind::Float: return value.as_float();
        case ValueKind::String: return value.as_string();
        case ValueKind::Enum: return value.as_enum().symbol;
        case ValueKind::Object: {
            ordered_json out = ordered_json::object();
            for (const auto& [k, v] : value.as_object()) {
                out[k] = value_to_json(v);
            }
            return out;
        }
    }
    return nullptr;
}

std::string to_display(const Value& value) {
    switch (value.kind()) {
        case ValueKind::Float: return format_double(value.as_float());
        case ValueKind::Object: {
            std::string out = "{";
            bool first = true;
            for (const auto& [k, v] : value.as_object()) {
                if (!first) {
                    out += ",";
                }
                first = false;
                out += nlohmann::ordered_json(k).dump() + ":" + to_display(v);
            }
            return out + "}";
        }
        default: return value_to_json(value).dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
    }
}

}  // namespace gse
