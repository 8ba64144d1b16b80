#include "gse/validate.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "gse/error.hpp"

namespace gse {

namespace {

bool subset(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return std::all_of(a.begin(), a.end(),
                       [&](const std::string& s) { return std::find(b.begin(), b.end(), s) != b.end(); });
}

TypeSet allowed_bits(TypeKind kind) {
    switch (kind) {
        case TypeKind::Integer: return kTypeInt;
        case TypeKind::Float: return kTypeInt | kTypeFloat;
        case TypeKind::String: return kTypeString;
        case TypeKind::Boolean: return kTypeBool;
        default: return 0;
    }
}

class Validator {
public:
    Validator(const StlProgram& program, const Schema& source, const Schema& target)
        : program_(program), source_(source), target_(target) {}

    std::vector<Diagnostic> run() {
        if (program_.aborts()) {
            if (!program_.commands.empty()) {
                add("abort-with-commands", "a MATCH with same_entity false must carry no commands", std::nullopt,
                    std::nullopt);
            }
            return std::move(out_);
        }
        for (std::size_t i = 0; i < program_.commands.size(); ++i) {
            check_command(i);
        }
        check_target_coverage();
        check_source_coverage();
        return std::move(out_);
    }

private:
    void add(std::string code, std::string message, std::optional<std::string> path,
             std::optional<std::size_t> index) {
        out_.push_back(Diagnostic{std::move(code), std::move(message), std::move(path), index});
    }

    const Field* source_field(const FieldPath& path, std::size_t i) {
        const Field* f = source_.find(path);
        if (f == nullptr) {
            add("unknown-source-path", "source schema has no field '" + path.str() + "'", path.str(), i);
        }
        return f;
    }

    const Field* target_field(const FieldPath& path, std::size_t i) {
        const Field* f = target_.find(path);
        if (f == nullptr) {
            add("unknown-target-path", "target schema has no field '" + path.str() + "'", path.str(), i);
        }
        return f;
    }

    bool has_producer_before(const FieldPath& path, std::size_t i) const {
        for (std::size_t j = 0; j < i; ++j) {
            const auto& c = program_.commands[j];
            if (is_producer(c) && command_target(c) == path) {
                return true;
            }
        }
        return false;
    }

    bool later_command_at(const FieldPath& path, std::size_t i, std::size_t variant_index) const {
        for (std::size_t j = i + 1; j < program_.commands.size(); ++j) {
            const auto& c = program_.commands[j];
            if (c.index() == variant_index && command_target(c) == path) {
                return true;
            }
        }
        return false;
    }

    bool default_follows(const FieldPath& path, std::size_t i) const {
        return later_command_at(path, i, StlCommand(cmd::Default{}).index());
    }

    bool link_follows(const FieldPath& path, std::size_t i) const {
        return later_command_at(path, i, StlCommand(cmd::Link{}).index());
    }

    /// A producer that may write null into a required target needs a DEFAULT
    /// after it.
    void check_nullable(bool may_be_null, const FieldPath& target_path, const Field& target, std::size_t i) {
        if (may_be_null && !target.optional && !default_follows(target_path, i)) {
            add("nullable",
                "'" + target_path.str() + "' is required but its producer may yield null and no DEFAULT follows",
                target_path.str(), i);
        }
    }

    void check_command(std::size_t i) {
        const StlCommand& command = program_.commands[i];
        const std::string name(command_name(command));
        std::visit(
            [&](const auto& c) {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, cmd::Copy> || std::is_same_v<T, cmd::Rename>) {
                    const Field* s = source_field(c.source, i);
                    const Field* t = target_field(c.target, i);
                    if (std::is_same_v<T, cmd::Rename> && !renamed_.insert(c.source.str()).second) {
                        add("duplicate-rename", "source '" + c.source.str() + "' is renamed more than once",
                            c.source.str(), i);
                    }
                    if (s == nullptr || t == nullptr) {
                        return;
                    }
                    std::string why;
                    if (!assignable(s->type, t->type, link_follows(c.target, i), &why)) {
                        add("type", name + " " + c.source.str() + " -> " + c.target.str() + ": " + why,
                            c.target.str(), i);
                    }
                    check_nullable(source_.nullable(c.source), c.target, *t, i);
                } else if constexpr (std::is_same_v<T, cmd::Cast>) {
                    const Field* s = source_field(c.source, i);
                    const Field* t = target_field(c.target, i);
                    if (s == nullptr || t == nullptr) {
                        return;
                    }
                    if (!(c.to == t->type)) {
                        add("type",
                            "CAST.to " + describe(c.to) + " differs from target type " + describe(t->type),
                            c.target.str(), i);
                    } else if (!castable(s->type.kind, c.to.kind)) {
                        add("type", "cannot cast " + describe(s->type) + " to " + describe(c.to), c.target.str(), i);
                    } else if (s->type.kind == c.to.kind && !assignable(s->type, c.to, false)) {
                        add("type", "identity cast between incompatible " + describe(s->type) + " and " +
                                        describe(c.to), c.target.str(), i);
                    }
                    check_nullable(source_.nullable(c.source), c.target, *t, i);
                } else if constexpr (std::is_same_v<T, cmd::Add> || std::is_same_v<T, cmd::Default>) {
                    const Field* t = target_field(c.target, i);
                    if (t == nullptr) {
                        return;
                    }
                    try {
                        check_literal(c.value, *t);
                    } catch (const ParseError& e) {
                        add("type", name + " literal for '" + c.target.str() + "': " + e.detail(), c.target.str(), i);
                    }
                } else if constexpr (std::is_same_v<T, cmd::Delete>) {
                    source_field(c.source, i);
                } else if constexpr (std::is_same_v<T, cmd::Missing>) {
                    target_field(c.target, i);
                } else if constexpr (std::is_same_v<T, cmd::Scale> || std::is_same_v<T, cmd::Shift>) {
                    const Field* t = target_field(c.target, i);
                    check_order(c.target, i);
                    if (t == nullptr) {
                        return;
                    }
                    double k = 0;
                    if constexpr (std::is_same_v<T, cmd::Scale>) {
                        k = c.factor;
                    } else {
                        k = c.offset;
                    }
                    if (!is_numeric(t->type.kind)) {
                        add("type", name + " target '" + c.target.str() + "' is " + describe(t->type) +
                                        ", not numeric", c.target.str(), i);
                    } else if (t->type.kind == TypeKind::Integer && std::trunc(k) != k) {
                        add("type", name + " by non-integral " + format_double(k) + " on integer target '" +
                                        c.target.str() + "'", c.target.str(), i);
                    }
                } else if constexpr (std::is_same_v<T, cmd::Link>) {
                    const Field* t = target_field(c.target, i);
                    check_order(c.target, i);
                    if (t == nullptr) {
                        return;
                    }
                    if (t->type.kind != TypeKind::Enum) {
                        add("type", "LINK target '" + c.target.str() + "' is " + describe(t->type) + ", not enum",
                            c.target.str(), i);
                        return;
                    }
                    check_link(c, *t, i);
                } else if constexpr (std::is_same_v<T, cmd::Gen>) {
                    // Typed where it is applied.
                } else if constexpr (std::is_same_v<T, cmd::Apply>) {
                    const Field* s = source_field(c.source, i);
                    const Field* t = target_field(c.target, i);
                    ExprPtr expr = resolve_apply(program_.commands, i);
                    if (expr == nullptr) {
                        add("unresolved-fn", "APPLY fn '" + c.name + "' is neither a prior GEN nor a unary builtin",
                            c.target.str(), i);
                    } else {
                        for (const auto& ref : source_refs(*expr)) {
                            source_field(ref, i);
                        }
                    }
                    if (s == nullptr || t == nullptr || expr == nullptr) {
                        return;
                    }
                    check_apply(c, *expr, *s, *t, i);
                }
            },
            command);
    }

    void check_order(const FieldPath& path, std::size_t i) {
        if (!has_producer_before(path, i)) {
            add("transform-order",
                std::string(command_name(program_.commands[i])) + " on '" + path.str() +
                    "' must follow a producer of that exact path",
                path.str(), i);
        }
    }

    /// Symbols that can reach the LINK at index i, or nullopt when unknown.
    std::optional<std::vector<std::string>> incoming_symbols(const FieldPath& path, std::size_t i) const {
        std::optional<std::vector<std::string>> symbols;
        for (std::size_t j = 0; j < i; ++j) {
            const auto& c = program_.commands[j];
            if (command_target(c) != path) {
                continue;
            }
            if (auto* copy = std::get_if<cmd::Copy>(&c)) {
                symbols = enum_variants(copy->source);
            } else if (auto* rename = std::get_if<cmd::Rename>(&c)) {
                symbols = enum_variants(rename->source);
            } else if (auto* cast = std::get_if<cmd::Cast>(&c)) {
                symbols = cast->to.kind == TypeKind::Enum ? std::optional(cast->to.variants) : std::nullopt;
            } else if (auto* add = std::get_if<cmd::Add>(&c)) {
                symbols = add->value.is_text() ? std::optional(std::vector{add->value.text()}) : std::nullopt;
            } else if (auto* def = std::get_if<cmd::Default>(&c)) {
                if (symbols && def->value.is_text()) {
                    symbols->push_back(def->value.text());
                } else if (!has_producer_before(path, j)) {
                    symbols = def->value.is_text() ? std::optional(std::vector{def->value.text()}) : std::nullopt;
                }
            } else if (std::holds_alternative<cmd::Apply>(c)) {
                ExprPtr expr = resolve_apply(program_.commands, j);
                symbols = expr ? literal_results(*expr) : std::nullopt;
            } else if (auto* link = std::get_if<cmd::Link>(&c)) {
                std::vector<std::string> next;
                for (const auto& [from, to] : link->table) {
                    next.push_back(to);
                }
                if (link->fallback) {
                    next.push_back(*link->fallback);
                }
                symbols = std::move(next);
            } else if (is_producer(c)) {
                symbols.reset();
            }
        }
        return symbols;
    }

    std::optional<std::vector<std::string>> enum_variants(const FieldPath& source_path) const {
        const Field* f = source_.find(source_path);
        if (f != nullptr && f->type.kind == TypeKind::Enum) {
            return f->type.variants;
        }
        return std::nullopt;
    }

    void check_link(const cmd::Link& link, const Field& target, std::size_t i) {
        std::set<std::string> keys;
        for (const auto& [from, to] : link.table) {
            if (!keys.insert(from).second) {
                add("type", "LINK table repeats key '" + from + "'", link.target.str(), i);
            }
        }
        if (auto incoming = incoming_symbols(link.target, i)) {
            for (const auto& [from, to] : link.table) {
                if (std::find(incoming->begin(), incoming->end(), from) == incoming->end()) {
                    add("type", "LINK key '" + from + "' is not a symbol that reaches '" + link.target.str() + "'",
                        link.target.str(), i);
                }
            }
        }
        for (const auto& [from, to] : link.table) {
            if (!target.type.has_variant(to)) {
                add("type", "LINK value '" + to + "' is not a variant of target '" + link.target.str() + "'",
                    link.target.str(), i);
            }
        }
        if (link.fallback && !target.type.has_variant(*link.fallback)) {
            add("type", "LINK fallback '" + *link.fallback + "' is not a variant of target '" + link.target.str() + "'",
                link.target.str(), i);
        }
    }

    void check_apply(const cmd::Apply& apply, const Expr& expr, const Field& s, const Field& t, std::size_t i) {
        if (t.type.kind == TypeKind::Enum) {
            auto symbols = literal_results(expr);
            if (!symbols) {
                add("type", "APPLY into enum target '" + apply.target.str() +
                                "' needs an expression whose results are symbol literals",
                    apply.target.str(), i);
                return;
            }
            for (const auto& sym : *symbols) {
                if (!t.type.has_variant(sym)) {
                    add("type", "APPLY may yield '" + sym + "', which is not a variant of target '" +
                                    apply.target.str() + "'",
                        apply.target.str(), i);
                }
            }
            if (infer_type(expr, type_bits(s.type.kind), source_) == 0) {
                add("type", "APPLY expression " + print_expr(expr) + " never yields a value for " + describe(s.type) +
                                " input", apply.target.str(), i);
            }
            check_nullable(source_.nullable(apply.source), apply.target, t, i);
            return;
        }
        TypeSet allowed = allowed_bits(t.type.kind);
        if (allowed == 0) {
            add("type", "APPLY cannot produce " + describe(t.type) + " target '" + apply.target.str() + "'",
                apply.target.str(), i);
            return;
        }
        TypeSet result = infer_type(expr, type_bits(s.type.kind), source_);
        TypeSet non_null = result & ~TypeSet{kTypeNull};
        if (non_null == 0) {
            add("type", "APPLY expression " + print_expr(expr) + " never yields a value for " + describe(s.type) +
                            " input", apply.target.str(), i);
        } else if ((non_null & ~allowed) != 0) {
            add("type", "APPLY expression " + print_expr(expr) + " may yield " + describe_type_set(non_null) +
                            " but target '" + apply.target.str() + "' is " + describe(t.type),
                apply.target.str(), i);
        }
        check_nullable(source_.nullable(apply.source) || (result & kTypeNull) != 0, apply.target, t, i);
    }

    // ---- coverage --------------------------------------------------------

    /// Paths written by producers; a DEFAULT that follows a producer of the
    /// same path is a value stage, not a producer.
    std::vector<std::pair<FieldPath, std::size_t>> producers() const {
        std::vector<std::pair<FieldPath, std::size_t>> out;
        for (std::size_t i = 0; i < program_.commands.size(); ++i) {
            const auto& c = program_.commands[i];
            if (!is_producer(c)) {
                continue;
            }
            FieldPath path = *command_target(c);
            if (std::holds_alternative<cmd::Default>(c) && has_producer_before(path, i)) {
                continue;
            }
            out.emplace_back(std::move(path), i);
        }
        return out;
    }

    void check_target_coverage() {
        auto prods = producers();
        for (std::size_t a = 0; a < prods.size(); ++a) {
            for (std::size_t b = 0; b < a; ++b) {
                const auto& [pa, ia] = prods[a];
                const auto& [pb, ib] = prods[b];
                if (pa.is_prefix_of(pb) || pb.is_prefix_of(pa)) {
                    add("conflict",
                        "'" + pa.str() + "' is produced by both command " + std::to_string(ib + 1) + " and command " +
                            std::to_string(ia + 1),
                        pa.str(), ia);
                }
            }
        }
        std::set<FieldPath> produced;
        for (const auto& [p, i] : prods) {
            produced.insert(p);
        }
        cover_targets(target_.fields, FieldPath{}, produced);
    }

    void cover_targets(const std::vector<Field>& fields, const FieldPath& prefix, const std::set<FieldPath>& produced) {
        for (const auto& f : fields) {
            FieldPath path = prefix;
            path.segments.push_back(f.name);
            if (produced.count(path)) {
                continue;
            }
            if (f.type.kind == TypeKind::Object && !f.type.fields.empty()) {
                cover_targets(f.type.fields, path, produced);
            } else {
                add("uncovered-target", "no command produces target '" + path.str() + "'", path.str(),
                    std::nullopt);
            }
        }
    }

    void check_source_coverage() {
        std::set<FieldPath> consumed;
        for (std::size_t i = 0; i < program_.commands.size(); ++i) {
            const auto& c = program_.commands[i];
            if (std::holds_alternative<cmd::Copy>(c) || std::holds_alternative<cmd::Rename>(c) ||
                std::holds_alternative<cmd::Cast>(c) || std::holds_alternative<cmd::Apply>(c) ||
                std::holds_alternative<cmd::Delete>(c)) {
                consumed.insert(*command_source(c));
            }
            if (std::holds_alternative<cmd::Apply>(c)) {
                if (ExprPtr expr = resolve_apply(program_.commands, i)) {
                    for (auto& ref : source_refs(*expr)) {
                        consumed.insert(std::move(ref));
                    }
                }
            }
        }
        consume_sources(source_.fields, FieldPath{}, consumed);
    }

    void consume_sources(const std::vector<Field>& fields, const FieldPath& prefix,
                         const std::set<FieldPath>& consumed) {
        for (const auto& f : fields) {
            FieldPath path = prefix;
            path.segments.push_back(f.name);
            if (consumed.count(path)) {
                continue;
            }
            if (f.type.kind == TypeKind::Object && !f.type.fields.empty()) {
                consume_sources(f.type.fields, path, consumed);
            } else {
                add("unconsumed-source", "source '" + path.str() + "' is neither mapped nor DELETEd", path.str(),
                    std::nullopt);
            }
        }
    }

    const StlProgram& program_;
    const Schema& source_;
    const Schema& target_;
    std::set<std::string> renamed_;
    std::vector<Diagnostic> out_;
};

}  // namespace

bool castable(TypeKind from, TypeKind to) noexcept {
    if (from == to) {
        return true;
    }
    switch (from) {
        case TypeKind::Integer: return to == TypeKind::Float || to == TypeKind::String;
        case TypeKind::Float: return to == TypeKind::Integer || to == TypeKind::String;
        case TypeKind::Boolean: return to == TypeKind::String;
        case TypeKind::String:
            return to == TypeKind::Integer || to == TypeKind::Float || to == TypeKind::Boolean || to == TypeKind::Enum;
        default: return false;
    }
}

bool assignable(const FieldType& from, const FieldType& to, bool relabel_enum, std::string* why) {
    auto fail = [&](std::string message) {
        if (why != nullptr) {
            *why = std::move(message);
        }
        return false;
    };
    if (from.kind == TypeKind::Integer && to.kind == TypeKind::Float) {
        return true;
    }
    if (from.kind != to.kind) {
        return fail("cannot store " + describe(from) + " into " + describe(to));
    }
    if (from.kind == TypeKind::Enum) {
        if (!relabel_enum && !subset(from.variants, to.variants)) {
            return fail("source variants of " + describe(from) + " are not all variants of " + describe(to));
        }
        return true;
    }
    if (from.kind == TypeKind::Object) {
        for (const auto& child : from.fields) {
            if (to.find_field(child.name) == nullptr) {
                return fail("nested field '" + child.name + "' has no counterpart in the target object");
            }
        }
        for (const auto& child : to.fields) {
            const Field* src = from.find_field(child.name);
            if (src == nullptr) {
                if (!child.optional) {
                    return fail("required nested field '" + child.name + "' is absent from the source object");
                }
                continue;
            }
            if (src->optional && !child.optional) {
                return fail("nested field '" + child.name + "' is optional in the source but required in the target");
            }
            std::string inner;
            if (!assignable(src->type, child.type, false, &inner)) {
                return fail("nested field '" + child.name + "': " + inner);
            }
        }
    }
    return true;
}

std::string format_diagnostic(const Diagnostic& d) {
    std::string out = "[" + d.code + "] ";
    if (d.path) {
        out += *d.path + ": ";
    }
    out += d.message;
    if (d.command_index) {
        out += " (command " + std::to_string(*d.command_index + 1) + ")";
    }
    return out;
}

Document diagnostic_to_document(const Diagnostic& d) {
    Document out = Document::object();
    out["code"] = d.code;
    out["message"] = d.message;
    if (d.path) {
        out["path"] = *d.path;
    }
    if (d.command_index) {
        out["command"] = *d.command_index;
    }
    return out;
}

Diagnostic diagnostic_from_document(const Document& doc) {
    Diagnostic d;
    d.code = doc.at("code").get<std::string>();
    d.message = doc.at("message").get<std::string>();
    if (doc.contains("path")) {
        d.path = doc.at("path").get<std::string>();
    }
    if (doc.contains("command")) {
        d.command_index = doc.at("command").get<std::size_t>();
    }
    return d;
}

std::vector<Diagnostic> validate_program(const StlProgram& program, const Schema& source, const Schema& target) {
    Validator v(program, source, target);
    return v.run();
}

}  // namespace gse
