#include "gse/document.hpp"

#include <charconv>
#include <regex>
#include <set>

#include <yaml-cpp/yaml.h>

#include "gse/error.hpp"
#include "gse/value.hpp"

namespace gse {

namespace {

const std::regex& int_pattern() {
    static const std::regex re(R"([-+]?[0-9]+)");
    return re;
}

const std::regex& float_pattern() {
    static const std::regex re(R"([-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?)");
    return re;
}

ParseError located(const std::string& message, const YAML::Mark& mark) {
    if (mark.is_null()) {
        return ParseError(message);
    }
    return ParseError(message, static_cast<std::size_t>(mark.line) + 1, static_cast<std::size_t>(mark.column) + 1);
}

Document resolve_plain(const std::string& s, const YAML::Mark& mark) {
    if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") {
        return nullptr;
    }
    if (s == "true" || s == "True" || s == "TRUE") {
        return true;
    }
    if (s == "false" || s == "False" || s == "FALSE") {
        return false;
    }
    if (std::regex_match(s, int_pattern())) {
        std::int64_t v = 0;
        const char* begin = s.data() + (s[0] == '+' ? 1 : 0);
        auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
        if (ec == std::errc::result_out_of_range) {
            throw located("integer literal out of 64-bit range: " + s, mark);
        }
        if (ec == std::errc{} && ptr == s.data() + s.size()) {
            return v;
        }
    }
    if (std::regex_match(s, float_pattern())) {
        double d = 0;
        const char* begin = s.data() + (s[0] == '+' ? 1 : 0);
        auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), d);
        if (ec == std::errc{} && ptr == s.data() + s.size()) {
            return d;
        }
    }
    return s;
}

Document convert(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Undefined:
        case YAML::NodeType::Null: return nullptr;
        case YAML::NodeType::Scalar: {
            const std::string& tag = node.Tag();
            if (tag == "!" || tag == "tag:yaml.org,2002:str") {
                return node.Scalar();
            }
            return resolve_plain(node.Scalar(), node.Mark());
        }
        case YAML::NodeType::Sequence: {
            Document out = Document::array();
            for (const auto& item : node) {
                out.push_back(convert(item));
            }
            return out;
        }
        case YAML::NodeType::Map: {
            Document out = Document::object();
            for (const auto& kv : node) {
                if (!kv.first.IsScalar()) {
                    throw located("map keys must be scalars", kv.first.Mark());
                }
                const std::string& key = kv.first.Scalar();
                if (out.contains(key)) {
                    throw located("duplicate key '" + key + "'", kv.first.Mark());
                }
                out[key] = convert(kv.second);
            }
            return out;
        }
    }
    return nullptr;
}

bool is_reserved_word(const std::string& s) {
    static const std::set<std::string> words = {"true", "false", "null", "yes", "no", "on", "off",
                                                "y", "n", "True", "False", "Null", "Yes", "No",
                                                "On", "Off", "TRUE", "FALSE", "NULL"};
    return words.count(s) > 0;
}

bool plain_key(const std::string& s) {
    static const std::regex re(R"([A-Za-z_][A-Za-z0-9_]*)");
    return std::regex_match(s, re) && !is_reserved_word(s);
}

std::string quote(const std::string& s) {
    std::string out = Document(s).dump(-1, ' ', false, Document::error_handler_t::replace);
    // YAML forbids raw DEL inside double-quoted scalars.
    std::string fixed;
    fixed.reserve(out.size());
    for (char c : out) {
        if (c == '\x7f') {
            fixed += "\\u007f";
        } else {
            fixed += c;
        }
    }
    return fixed;
}

std::string key_text(const std::string& k) {
    return plain_key(k) ? k : quote(k);
}

void flow(const Document& node, std::string& out) {
    switch (node.type()) {
        case Document::value_t::null: out += "null"; break;
        case Document::value_t::boolean: out += node.get<bool>() ? "true" : "false"; break;
        case Document::value_t::number_integer: out += std::to_string(node.get<std::int64_t>()); break;
        case Document::value_t::number_unsigned: out += std::to_string(node.get<std::uint64_t>()); break;
        case Document::value_t::number_float: out += format_double(node.get<double>()); break;
        case Document::value_t::string: out += quote(node.get<std::string>()); break;
        case Document::value_t::array: {
            out += "[";
            bool first = true;
            for (const auto& item : node) {
                if (!first) {
                    out += ", ";
                }
                first = false;
                flow(item, out);
            }
            out += "]";
            break;
        }
        case Document::value_t::object: {
            out += "{";
            bool first = true;
            for (auto it = node.begin(); it != node.end(); ++it) {
                if (!first) {
                    out += ", ";
                }
                first = false;
                out += key_text(it.key());
                out += ": ";
                flow(it.value(), out);
            }
            out += "}";
            break;
        }
        default: out += "null"; break;
    }
}

std::size_t depth(const Document& node) {
    if (!node.is_structured()) {
        return 0;
    }
    std::size_t d = 0;
    for (const auto& child : node) {
        d = std::max(d, depth(child));
    }
    return d + 1;
}

bool array_of_containers(const Document& node) {
    if (!node.is_array()) {
        return false;
    }
    for (const auto& child : node) {
        if (child.is_structured() && !child.empty()) {
            return true;
        }
    }
    return false;
}

constexpr std::size_t kFlowWidth = 100;

bool inline_value(const Document& node) {
    if (!node.is_structured() || node.empty()) {
        return true;
    }
    if (array_of_containers(node) || depth(node) > 2) {
        return false;
    }
    std::string text;
    flow(node, text);
    return text.size() <= kFlowWidth;
}

void block(const Document& node, std::size_t indent, std::string& out);

void block_entry_value(const Document& value, std::size_t indent, std::string& out) {
    if (inline_value(value)) {
        out += " ";
        flow(value, out);
        out += "\n";
    } else {
        out += "\n";
        block(value, indent + 2, out);
    }
}

void block(const Document& node, std::size_t indent, std::string& out) {
    const std::string pad(indent, ' ');
    if (node.is_object()) {
        for (auto it = node.begin(); it != node.end(); ++it) {
            out += pad + key_text(it.key()) + ":";
            block_entry_value(it.value(), indent, out);
        }
        return;
    }
    for (const auto& item : node) {
        if (item.is_object() && !item.empty()) {
            std::string nested;
            block(item, indent + 2, nested);
            out += pad + "- " + nested.substr(indent + 2);
        } else if (inline_value(item)) {
            out += pad + "- ";
            flow(item, out);
            out += "\n";
        } else {
            out += pad + "-\n";
            block(item, indent + 2, out);
        }
    }
}

}  // namespace

Document parse_document(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw located(e.msg, e.mark);
    }
    return convert(root);
}

std::string emit_document(const Document& doc) {
    if (!doc.is_structured() || doc.empty()) {
        return emit_flow(doc) + "\n";
    }
    std::string out;
    block(doc, 0, out);
    return out;
}

std::string emit_flow(const Document& doc) {
    std::string out;
    flow(doc, out);
    return out;
}

}  // namespace gse
