#include "gse/stl.hpp"

#include <cmath>
#include <set>

#include "gse/error.hpp"

namespace gse {

namespace {

std::string symbol_text(const Document& node, const std::string& where) {
    if (node.is_string()) {
        return node.get<std::string>();
    }
    if (node.is_number_integer()) {
        return std::to_string(node.get<std::int64_t>());
    }
    if (node.is_boolean()) {
        return node.get<bool>() ? "true" : "false";
    }
    throw ParseError(where + ": expected a symbol");
}

/// Reads one command's parameter map, rejecting unknown keys.
class Params {
public:
    Params(std::string_view keyword, const Document& doc) : keyword_(keyword), doc_(doc) {
        if (!doc.is_object()) {
            throw ParseError(keyword_ + ": parameters must be a map");
        }
    }

    bool has(const char* key) {
        seen_.insert(key);
        return doc_.contains(key) && !doc_.at(key).is_null();
    }

    const Document& get(const char* key) {
        if (!has(key)) {
            throw ParseError(keyword_ + ": missing required parameter '" + key + "'");
        }
        return doc_.at(key);
    }

    std::string text(const char* key) {
        const Document& v = get(key);
        if (!v.is_string()) {
            throw ParseError(keyword_ + ": parameter '" + key + "' must be a string");
        }
        return v.get<std::string>();
    }

    FieldPath path(const char* key) {
        std::string t = text(key);
        try {
            return FieldPath::parse(t);
        } catch (const ParseError& e) {
            throw ParseError(keyword_ + ": " + e.detail());
        }
    }

    double number(const char* key) {
        const Document& v = get(key);
        if (!v.is_number()) {
            throw ParseError(keyword_ + ": parameter '" + key + "' must be a number");
        }
        double d = v.get<double>();
        if (!std::isfinite(d)) {
            throw ParseError(keyword_ + ": " + key + " must be finite");
        }
        return d;
    }

    void finish() const {
        for (auto it = doc_.begin(); it != doc_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw ParseError(keyword_ + ": unknown parameter '" + it.key() + "'");
            }
        }
    }

    const std::string& keyword() const { return keyword_; }

private:
    std::string keyword_;
    const Document& doc_;
    std::set<std::string> seen_;
};

ExprPtr parse_inline(const std::string& keyword, const std::string& text) {
    try {
        return parse_expr(text, Dialect::Transform);
    } catch (const ParseError& e) {
        throw ParseError(keyword + ": " + e.detail());
    }
}

SchemaRef ref_from_document(const Document& doc, const char* key) {
    if (!doc.contains(key)) {
        throw ParseError(std::string("missing '") + key + "'");
    }
    const Document& ref = doc.at(key);
    if (!ref.is_object()) {
        throw ParseError(std::string("'") + key + "' must be a map with subject and version");
    }
    Params p(key, ref);
    SchemaRef out;
    out.subject = p.text("subject");
    const Document& v = p.get("version");
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        throw ParseError(std::string(key) + ": version must be a positive integer");
    }
    out.version = v.get<std::int64_t>();
    p.finish();
    return out;
}

Document ref_to_document(const SchemaRef& ref) {
    Document out = Document::object();
    out["subject"] = ref.subject;
    out["version"] = ref.version;
    return out;
}

Document double_doc(double d) {
    return Document(d);
}

}  // namespace

const std::string* cmd::Link::lookup(std::string_view symbol) const {
    for (const auto& [from, to] : table) {
        if (from == symbol) {
            return &to;
        }
    }
    return fallback ? &*fallback : nullptr;
}

std::string_view command_name(const StlCommand& command) noexcept {
    static constexpr std::string_view names[] = {"COPY",  "ADD",   "CAST", "DELETE", "RENAME", "DEFAULT",
                                                 "MISSING", "SCALE", "SHIFT", "LINK", "GEN",    "APPLY"};
    return names[command.index()];
}

std::string command_keyword(const StlCommand& command) {
    std::string out(command_name(command));
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::optional<FieldPath> command_source(const StlCommand& command) {
    return std::visit(
        [](const auto& c) -> std::optional<FieldPath> {
            if constexpr (requires { c.source; }) {
                return c.source;
            } else {
                return std::nullopt;
            }
        },
        command);
}

std::optional<FieldPath> command_target(const StlCommand& command) {
    return std::visit(
        [](const auto& c) -> std::optional<FieldPath> {
            if constexpr (requires { c.target; }) {
                return c.target;
            } else {
                return std::nullopt;
            }
        },
        command);
}

bool is_producer(const StlCommand& command) noexcept {
    return std::holds_alternative<cmd::Copy>(command) || std::holds_alternative<cmd::Rename>(command) ||
           std::holds_alternative<cmd::Cast>(command) || std::holds_alternative<cmd::Add>(command) ||
           std::holds_alternative<cmd::Default>(command) || std::holds_alternative<cmd::Apply>(command) ||
           std::holds_alternative<cmd::Missing>(command);
}

bool is_value_transform(const StlCommand& command) noexcept {
    return std::holds_alternative<cmd::Scale>(command) || std::holds_alternative<cmd::Shift>(command) ||
           std::holds_alternative<cmd::Link>(command);
}

cmd::Match match_from_document(const Document& params) {
    Params p("match", params);
    cmd::Match m;
    const Document& same = p.get("same_entity");
    if (!same.is_boolean()) {
        throw ParseError("match: same_entity must be a boolean");
    }
    m.same_entity = same.get<bool>();
    if (p.has("reason")) {
        m.reason = p.text("reason");
    }
    p.finish();
    return m;
}

StlCommand command_from_document(std::string_view keyword, const Document& params) {
    Params p(keyword, params);
    StlCommand out = [&]() -> StlCommand {
        if (keyword == "copy") {
            return cmd::Copy{p.path("source"), p.path("target")};
        }
        if (keyword == "rename") {
            return cmd::Rename{p.path("source"), p.path("target")};
        }
        if (keyword == "add" || keyword == "default") {
            FieldPath target = p.path("target");
            if (!params.contains("value")) {
                throw ParseError(std::string(keyword) + ": missing required parameter 'value'");
            }
            p.has("value");
            Value value;
            try {
                value = value_from_json(params.at("value"));
            } catch (const std::exception& e) {
                throw ParseError(std::string(keyword) + ": invalid literal: " + e.what());
            }
            if (keyword == "add") {
                return cmd::Add{std::move(target), std::move(value)};
            }
            return cmd::Default{std::move(target), std::move(value)};
        }
        if (keyword == "cast") {
            FieldPath source = p.path("source");
            FieldPath target = p.path("target");
            FieldType to;
            try {
                to = field_type_from_document(p.get("to"));
            } catch (const ParseError& e) {
                throw ParseError("cast: " + e.detail());
            }
            return cmd::Cast{std::move(source), std::move(target), std::move(to)};
        }
        if (keyword == "delete") {
            return cmd::Delete{p.path("source")};
        }
        if (keyword == "missing") {
            FieldPath target = p.path("target");
            std::string reason = p.has("reason") ? p.text("reason") : std::string();
            return cmd::Missing{std::move(target), std::move(reason)};
        }
        if (keyword == "scale") {
            FieldPath target = p.path("target");
            double factor = p.number("factor");
            if (factor == 0.0) {
                throw ParseError("scale: factor must be nonzero");
            }
            return cmd::Scale{std::move(target), factor};
        }
        if (keyword == "shift") {
            FieldPath target = p.path("target");
            return cmd::Shift{std::move(target), p.number("offset")};
        }
        if (keyword == "link") {
            cmd::Link link;
            link.target = p.path("target");
            const Document& table = p.get("table");
            if (!table.is_object() || table.empty()) {
                throw ParseError("link: table must be a non-empty map");
            }
            for (auto it = table.begin(); it != table.end(); ++it) {
                link.table.emplace_back(it.key(), symbol_text(it.value(), "link: table entry '" + it.key() + "'"));
            }
            if (p.has("fallback")) {
                link.fallback = symbol_text(p.get("fallback"), "link: fallback");
            }
            return link;
        }
        if (keyword == "gen") {
            std::string name = p.text("name");
            if (!is_identifier(name)) {
                throw ParseError("gen: name '" + name + "' is not an identifier");
            }
            if (is_reserved_word(name) || find_builtin(name, Dialect::Pipeline) != nullptr) {
                throw ParseError("gen: name '" + name + "' is reserved");
            }
            return cmd::Gen{std::move(name), parse_inline("gen", p.text("expr"))};
        }
        if (keyword == "apply") {
            cmd::Apply apply;
            apply.source = p.path("source");
            apply.target = p.path("target");
            std::string fn = p.text("fn");
            if (is_identifier(fn) && !is_reserved_word(fn)) {
                apply.name = std::move(fn);
            } else {
                apply.expr = parse_inline("apply", fn);
            }
            return apply;
        }
        throw ParseError("unknown command '" + std::string(keyword) + "'");
    }();
    p.finish();
    return out;
}

Document command_to_document(const StlCommand& command) {
    Document out = Document::object();
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (requires { c.source; }) {
                out["source"] = c.source.str();
            }
            if constexpr (requires { c.target; }) {
                out["target"] = c.target.str();
            }
            if constexpr (std::is_same_v<T, cmd::Add> || std::is_same_v<T, cmd::Default>) {
                out["value"] = value_to_json(c.value);
            } else if constexpr (std::is_same_v<T, cmd::Cast>) {
                out["to"] = field_type_to_document(c.to);
            } else if constexpr (std::is_same_v<T, cmd::Missing>) {
                out["reason"] = c.reason;
            } else if constexpr (std::is_same_v<T, cmd::Scale>) {
                out["factor"] = double_doc(c.factor);
            } else if constexpr (std::is_same_v<T, cmd::Shift>) {
                out["offset"] = double_doc(c.offset);
            } else if constexpr (std::is_same_v<T, cmd::Link>) {
                Document table = Document::object();
                for (const auto& [from, to] : c.table) {
                    table[from] = to;
                }
                out["table"] = std::move(table);
                if (c.fallback) {
                    out["fallback"] = *c.fallback;
                }
            } else if constexpr (std::is_same_v<T, cmd::Gen>) {
                out["name"] = c.name;
                out["expr"] = print_expr(*c.expr);
            } else if constexpr (std::is_same_v<T, cmd::Apply>) {
                out["fn"] = c.is_inline() ? print_expr(*c.expr) : c.name;
            }
        },
        command);
    return out;
}

StlProgram program_from_document(const Document& doc) {
    if (!doc.is_object()) {
        throw ParseError("mapping document must be a map");
    }
    static const std::set<std::string> known = {"source", "target", "match", "commands"};
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!known.count(it.key())) {
            throw ParseError("unknown top-level key '" + it.key() + "'");
        }
    }
    StlProgram program;
    program.source = ref_from_document(doc, "source");
    program.target = ref_from_document(doc, "target");
    if (!doc.contains("match") || doc.at("match").is_null()) {
        throw ParseError("missing MATCH");
    }
    program.match = match_from_document(doc.at("match"));
    if (doc.contains("commands") && !doc.at("commands").is_null()) {
        const Document& list = doc.at("commands");
        if (!list.is_array()) {
            throw ParseError("'commands' must be a list");
        }
        std::set<std::string> gen_names;
        for (std::size_t i = 0; i < list.size(); ++i) {
            const Document& entry = list.at(i);
            const std::string where = "command " + std::to_string(i + 1);
            if (!entry.is_object() || entry.size() != 1) {
                throw ParseError(where + ": expected a single-key map");
            }
            const std::string keyword = entry.begin().key();
            if (keyword == "match") {
                throw ParseError(where + ": MATCH must appear only as the header");
            }
            StlCommand command;
            try {
                command = command_from_document(keyword, entry.begin().value());
            } catch (const ParseError& e) {
                throw ParseError(where + ": " + e.detail());
            }
            if (auto* gen = std::get_if<cmd::Gen>(&command)) {
                if (!gen_names.insert(gen->name).second) {
                    throw ParseError(where + ": duplicate GEN name '" + gen->name + "'");
                }
            }
            program.commands.push_back(std::move(command));
        }
    }
    return program;
}

StlProgram parse_program(std::string_view text) {
    return program_from_document(parse_document(text));
}

Document program_to_document(const StlProgram& program) {
    Document out = Document::object();
    out["source"] = ref_to_document(program.source);
    out["target"] = ref_to_document(program.target);
    Document match = Document::object();
    match["same_entity"] = program.match.same_entity;
    match["reason"] = program.match.reason;
    out["match"] = std::move(match);
    Document list = Document::array();
    for (const auto& c : program.commands) {
        Document entry = Document::object();
        entry[command_keyword(c)] = command_to_document(c);
        list.push_back(std::move(entry));
    }
    out["commands"] = std::move(list);
    return out;
}

std::string serialize_program(const StlProgram& program) {
    return emit_document(program_to_document(program));
}

ExprPtr resolve_apply(const std::vector<StlCommand>& commands, std::size_t index) {
    const auto& apply = std::get<cmd::Apply>(commands.at(index));
    if (apply.is_inline()) {
        return apply.expr;
    }
    for (std::size_t i = index; i-- > 0;) {
        if (auto* gen = std::get_if<cmd::Gen>(&commands[i]); gen != nullptr && gen->name == apply.name) {
            return gen->expr;
        }
    }
    if (is_unary_builtin(apply.name)) {
        return std::make_shared<const Expr>(
            Expr{ast::Call{apply.name, {std::make_shared<const Expr>(Expr{ast::ValueRef{}})}}});
    }
    return nullptr;
}

std::string describe_command(const StlCommand& command) {
    std::string out(command_name(command));
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (requires { c.source; } && requires { c.target; }) {
                out += " " + c.source.str() + " -> " + c.target.str();
            } else if constexpr (requires { c.source; }) {
                out += " " + c.source.str();
            } else if constexpr (requires { c.target; }) {
                out += " " + c.target.str();
            }
            if constexpr (std::is_same_v<T, cmd::Add> || std::is_same_v<T, cmd::Default>) {
                out += " = " + to_display(c.value);
            } else if constexpr (std::is_same_v<T, cmd::Cast>) {
                out += " as " + describe(c.to);
            } else if constexpr (std::is_same_v<T, cmd::Scale>) {
                out += " * " + format_double(c.factor);
            } else if constexpr (std::is_same_v<T, cmd::Shift>) {
                out += " + " + format_double(c.offset);
            } else if constexpr (std::is_same_v<T, cmd::Gen>) {
                out += " " + c.name + " = " + print_expr(*c.expr);
            } else if constexpr (std::is_same_v<T, cmd::Apply>) {
                out += " via " + (c.is_inline() ? print_expr(*c.expr) : c.name);
            }
        },
        command);
    return out;
}

}  // namespace gse
