#include "gse/assembler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "gse/error.hpp"
#include "gse/interpreter.hpp"
#include "gse/validate.hpp"

namespace gse {

namespace {

ExprPtr node(decltype(Expr::node) n) {
    return std::make_shared<const Expr>(Expr{std::move(n)});
}

ExprPtr literal(Value v) {
    return node(ast::Literal{std::move(v)});
}

ExprPtr text(const std::string& s) {
    return literal(Value{s});
}

ExprPtr call(std::string name, std::vector<ExprPtr> args) {
    return node(ast::Call{std::move(name), std::move(args)});
}

/// Literal as an expression; objects become record constructors.
ExprPtr literal_expr(const Value& v) {
    if (v.kind() == ValueKind::Object) {
        ast::Record record;
        for (const auto& [key, child] : v.as_object()) {
            record.fields.emplace_back(key, literal_expr(child));
        }
        return node(std::move(record));
    }
    if (v.kind() == ValueKind::Enum) {
        return text(v.text());
    }
    return literal(v);
}

std::string header(const std::string& comment, const StlProgram& p) {
    return comment + " source: " + p.source.subject + " v" + std::to_string(p.source.version) + "\n" + comment +
           " target: " + p.target.subject + " v" + std::to_string(p.target.version) + "\n";
}

// ---- portable ------------------------------------------------------------

class PortableBackend : public Backend {
public:
    std::string_view name() const noexcept override { return "portable"; }
    std::string_view media_type() const noexcept override { return "text/x-stl"; }
    std::string emit(const StlProgram& program, const Schema&, const Schema&) const override {
        return serialize_program(program);
    }
};

// ---- pipeline-expr -------------------------------------------------------

class PipelineBackend : public Backend {
public:
    std::string_view name() const noexcept override { return "pipeline-expr"; }
    std::string_view media_type() const noexcept override { return "text/x-gse-expr"; }

    std::string emit(const StlProgram& program, const Schema&, const Schema& target) const override {
        std::string out = "# gse pipeline-expr\n" + header("#", program);
        if (program.aborts()) {
            return out + print_expr(*call("fail_abort", {text("schemas do not describe the same entity" +
                                                               (program.match.reason.empty()
                                                                    ? std::string()
                                                                    : ": " + program.match.reason))})) +
                   "\n";
        }
        std::vector<std::size_t> order;
        for (const auto& f : target.fields) {
            field_order(program, f, FieldPath{{f.name}}, order);
        }
        // Record fields evaluate in declaration order; when that differs from
        // command order, replay each command's prefix first so the first
        // failure is the one the interpreter would raise.
        bool guarded = !std::is_sorted(order.begin(), order.end());
        if (guarded) {
            out += "seq(\n";
            std::sort(order.begin(), order.end());
            for (std::size_t i : order) {
                out += "  " + print_expr(*path_expr(program, target, *command_target(program.commands[i]), i + 1)) +
                       ",\n";
            }
        }
        out += "{\n";
        bool first = true;
        for (const auto& f : target.fields) {
            if (!first) {
                out += ",\n";
            }
            first = false;
            FieldPath p{{f.name}};
            out += "  " + f.name + ": " + print_expr(*field_expr(program, target, f, p));
        }
        return out + (guarded ? "\n})\n" : "\n}\n");
    }

private:
    ExprPtr field_expr(const StlProgram& program, const Schema& target, const Field& f, const FieldPath& path) const {
        if (ExprPtr e = path_expr(program, target, path)) {
            return e;
        }
        if (f.type.kind == TypeKind::Object) {
            ast::Record record;
            for (const auto& c : f.type.fields) {
                FieldPath cp = path;
                cp.segments.push_back(c.name);
                record.fields.emplace_back(c.name, field_expr(program, target, c, cp));
            }
            return node(std::move(record));
        }
        throw CompileError("pipeline-expr: no producer for '" + path.str() + "'");
    }

    /// Indices of the commands evaluated for `f`, in record evaluation order.
    static void field_order(const StlProgram& program, const Field& f, const FieldPath& path,
                            std::vector<std::size_t>& out) {
        std::size_t before = out.size();
        for (std::size_t i = 0; i < program.commands.size(); ++i) {
            if (command_target(program.commands[i]) == path) {
                out.push_back(i);
            }
        }
        if (out.size() == before && f.type.kind == TypeKind::Object) {
            for (const auto& c : f.type.fields) {
                FieldPath cp = path;
                cp.segments.push_back(c.name);
                field_order(program, c, cp, out);
            }
        }
    }

    /// Composition of the commands before `end` writing exactly `path`; nullptr when none.
    static ExprPtr path_expr(const StlProgram& program, const Schema& target, const FieldPath& path,
                             std::size_t end = SIZE_MAX) {
        ExprPtr current;
        for (std::size_t i = 0; i < std::min(end, program.commands.size()); ++i) {
            const auto& command = program.commands[i];
            if (command_target(command) != path) {
                continue;
            }
            std::visit(
                [&](const auto& c) {
                    using T = std::decay_t<decltype(c)>;
                    if constexpr (std::is_same_v<T, cmd::Copy> || std::is_same_v<T, cmd::Rename>) {
                        current = node(ast::SourceRef{c.source});
                    } else if constexpr (std::is_same_v<T, cmd::Cast>) {
                        ExprPtr src = node(ast::SourceRef{c.source});
                        if (c.to.kind == TypeKind::Object) {
                            current = src;
                        } else {
                            std::vector<ExprPtr> args{src, text(std::string(to_string(c.to.kind)))};
                            for (const auto& v : c.to.variants) {
                                args.push_back(text(v));
                            }
                            current = call("cast", std::move(args));
                        }
                    } else if constexpr (std::is_same_v<T, cmd::Add>) {
                        current = literal_expr(check_literal(c.value, *target.find(path)));
                    } else if constexpr (std::is_same_v<T, cmd::Default>) {
                        ExprPtr lit = literal_expr(check_literal(c.value, *target.find(path)));
                        current = current ? call("coalesce", {current, lit}) : lit;
                    } else if constexpr (std::is_same_v<T, cmd::Missing>) {
                        current = call("fail_mapping", {text(path.str())});
                    } else if constexpr (std::is_same_v<T, cmd::Scale>) {
                        current = call("scale", {current, literal(Value{c.factor})});
                    } else if constexpr (std::is_same_v<T, cmd::Shift>) {
                        current = call("shift", {current, literal(Value{c.offset})});
                    } else if constexpr (std::is_same_v<T, cmd::Link>) {
                        std::vector<ExprPtr> args{current};
                        if (c.fallback) {
                            args.push_back(text(*c.fallback));
                        }
                        for (const auto& [from, to] : c.table) {
                            args.push_back(text(from));
                            args.push_back(text(to));
                        }
                        current = call(c.fallback ? "link_or" : "link", std::move(args));
                    } else if constexpr (std::is_same_v<T, cmd::Apply>) {
                        current = call("bind", {node(ast::SourceRef{c.source}), resolve_apply(program.commands, i)});
                    }
                },
                command);
        }
        return current;
    }
};

// ---- sql-view ------------------------------------------------------------

bool sql_reserved(std::string_view word) {
    static constexpr std::array<std::string_view, 76> words = {
        "all",      "and",    "any",     "as",        "asc",     "between", "both",    "by",      "case",
        "cast",     "check",  "column",  "constraint", "create", "cross",   "current", "date",    "day",
        "default",  "delete", "desc",    "distinct",  "drop",    "else",    "end",     "except",  "exists",
        "false",    "fetch",  "for",     "foreign",   "from",    "full",    "group",   "having",  "hour",
        "in",       "inner",  "insert",  "intersect", "interval", "into",   "is",      "join",    "key",
        "leading",  "left",   "like",    "limit",     "minute",  "month",   "natural", "not",     "null",
        "offset",   "on",     "or",      "order",     "outer",   "position", "primary", "range",  "right",
        "row",      "rows",   "second",  "select",    "set",     "table",   "then",    "time",    "timestamp",
        "to",       "true",   "union",   "user"};
    static constexpr std::array<std::string_view, 8> more = {"using", "value", "values", "when",
                                                             "where", "with",  "year",   "level"};
    std::string lower(word);
    for (char& c : lower) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return std::find(words.begin(), words.end(), lower) != words.end() ||
           std::find(more.begin(), more.end(), lower) != more.end();
}

std::string sql_ident(const std::string& name) {
    if (is_identifier(name) && !sql_reserved(name)) {
        return name;
    }
    std::string out = "\"";
    for (char c : name) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

std::string sql_string(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        out += c;
        if (c == '\'') {
            out += '\'';
        }
    }
    return out + "'";
}

std::string sql_type(TypeKind kind) {
    switch (kind) {
        case TypeKind::Integer: return "BIGINT";
        case TypeKind::Float: return "DOUBLE PRECISION";
        case TypeKind::Boolean: return "BOOLEAN";
        default: return "VARCHAR";
    }
}

/// SQL text plus whether it can be used as an operand without parentheses.
struct Sql {
    std::string text;
    bool atomic = true;

    std::string operand() const { return atomic ? text : "(" + text + ")"; }
};

class Untranslatable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Sql sql_literal(const Value& v) {
    switch (v.kind()) {
        case ValueKind::Null: return {"NULL"};
        case ValueKind::Boolean: return {v.as_bool() ? "TRUE" : "FALSE"};
        case ValueKind::Integer: return {std::to_string(v.as_int()), v.as_int() >= 0};
        case ValueKind::Float: return {format_double(v.as_float()), !std::signbit(v.as_float())};
        case ValueKind::String:
        case ValueKind::Enum: return {sql_string(v.text())};
        case ValueKind::Object: break;
    }
    throw Untranslatable("object literals have no column form");
}

class SqlExpr {
public:
    SqlExpr(Sql input) : input_(std::move(input)) {}

    Sql translate(const Expr& e) const {
        return std::visit([&](const auto& n) { return visit(n); }, e.node);
    }

private:
    Sql visit(const ast::Literal& n) const { return sql_literal(n.value); }
    Sql visit(const ast::ValueRef&) const { return input_; }
    Sql visit(const ast::SourceRef& n) const {
        if (n.path.segments.size() != 1) {
            throw Untranslatable("nested path src." + n.path.str());
        }
        return {sql_ident(n.path.segments[0])};
    }
    Sql visit(const ast::Record&) const { throw Untranslatable("record constructor"); }

    Sql visit(const ast::Unary& n) const {
        Sql a = translate(*n.operand);
        if (n.op == UnaryOp::Not) {
            return {"NOT " + a.operand(), false};
        }
        return {"-" + a.operand(), false};
    }

    Sql visit(const ast::Binary& n) const {
        Sql a = translate(*n.lhs);
        Sql b = translate(*n.rhs);
        std::string op;
        switch (n.op) {
            case BinaryOp::Add: op = "+"; break;
            case BinaryOp::Sub: op = "-"; break;
            case BinaryOp::Mul: op = "*"; break;
            case BinaryOp::Div:
                return {"CAST(" + a.text + " AS DOUBLE PRECISION) / " + b.operand(), false};
            case BinaryOp::Mod: return {"MOD(" + a.text + ", " + b.text + ")"};
            case BinaryOp::Eq: op = "="; break;
            case BinaryOp::Ne: op = "<>"; break;
            case BinaryOp::Lt: op = "<"; break;
            case BinaryOp::Le: op = "<="; break;
            case BinaryOp::Gt: op = ">"; break;
            case BinaryOp::Ge: op = ">="; break;
            case BinaryOp::And: op = "AND"; break;
            case BinaryOp::Or: op = "OR"; break;
        }
        return {a.operand() + " " + op + " " + b.operand(), false};
    }

    Sql visit(const ast::Call& n) const {
        std::vector<Sql> args;
        for (const auto& a : n.args) {
            args.push_back(translate(*a));
        }
        const std::string& fn = n.name;
        auto list = [&](std::size_t from = 0) {
            std::string out;
            for (std::size_t i = from; i < args.size(); ++i) {
                out += (i > from ? ", " : "") + args[i].text;
            }
            return out;
        };
        if (fn == "if") {
            return {"CASE WHEN " + args[0].text + " THEN " + args[1].text + " ELSE " + args[2].text + " END"};
        }
        if (fn == "round" || fn == "floor" || fn == "ceil") {
            std::string f = fn == "round" ? "ROUND" : fn == "floor" ? "FLOOR" : "CEILING";
            return {"CAST(" + f + "(" + args[0].text + ") AS BIGINT)"};
        }
        if (fn == "abs") return {"ABS(" + args[0].text + ")"};
        if (fn == "min") return {"LEAST(" + list() + ")"};
        if (fn == "max") return {"GREATEST(" + list() + ")"};
        if (fn == "lower") return {"LOWER(" + args[0].text + ")"};
        if (fn == "upper") return {"UPPER(" + args[0].text + ")"};
        if (fn == "concat") {
            std::string out;
            for (std::size_t i = 0; i < args.size(); ++i) {
                out += (i > 0 ? " || " : "") + args[i].operand();
            }
            return {out, false};
        }
        if (fn == "substr") {
            return {"SUBSTRING(" + args[0].text + " FROM " + args[1].operand() + " + 1 FOR " + args[2].text + ")"};
        }
        if (fn == "to_string") return {"CAST(" + args[0].text + " AS VARCHAR)"};
        throw Untranslatable("function '" + fn + "' has no portable SQL form");
    }

    Sql input_;
};

class SqlBackend : public Backend {
public:
    std::string_view name() const noexcept override { return "sql-view"; }
    std::string_view media_type() const noexcept override { return "text/x-sql"; }

    std::string emit(const StlProgram& program, const Schema& source, const Schema& target) const override {
        if (program.aborts()) {
            throw CompileError("sql-view: the mapping aborts (MATCH same_entity is false)");
        }
        for (const Schema* s : {&source, &target}) {
            for (const auto& f : s->fields) {
                if (f.type.kind == TypeKind::Object) {
                    throw CompileError("sql-view: nested field '" + f.name + "' in " + s->subject +
                                       "; only flat schemas are supported");
                }
            }
        }
        std::vector<std::optional<Sql>> columns(target.fields.size());
        for (std::size_t i = 0; i < program.commands.size(); ++i) {
            const auto& command = program.commands[i];
            auto target_path = command_target(command);
            if (!target_path) {
                continue;
            }
            std::size_t col = static_cast<std::size_t>(
                std::find_if(target.fields.begin(), target.fields.end(),
                             [&](const Field& f) { return f.name == target_path->segments[0]; }) -
                target.fields.begin());
            try {
                columns[col] = step(program, i, columns[col], target.fields[col]);
            } catch (const Untranslatable& e) {
                throw CompileError("sql-view: command " + std::to_string(i + 1) + " (" +
                                   std::string(command_name(command)) + " " + target_path->str() +
                                   ") is untranslatable: " + e.what());
            }
        }
        std::string out = "-- gse sql-view\n" + header("--", program);
        out += "-- Dialect: ANSI SQL subset (CAST, CASE, COALESCE, SUBSTRING, ||) plus LEAST/GREATEST.\n";
        out += "-- LINK symbols absent from the table and without fallback yield NULL.\n";
        out += "SELECT\n";
        for (std::size_t i = 0; i < target.fields.size(); ++i) {
            const std::string column = sql_ident(target.fields[i].name);
            std::string expr = columns[i]->text;
            out += "  " + (expr == column ? expr : expr + " AS " + column);
            out += i + 1 < target.fields.size() ? ",\n" : "\n";
        }
        out += "FROM " + sql_ident(program.source.subject + "_v" + std::to_string(program.source.version)) + ";\n";
        return out;
    }

private:
    static Sql step(const StlProgram& program, std::size_t index, const std::optional<Sql>& current,
                    const Field& field) {
        const auto& command = program.commands[index];
        if (auto* c = std::get_if<cmd::Copy>(&command)) return {sql_ident(c->source.segments[0])};
        if (auto* c = std::get_if<cmd::Rename>(&command)) return {sql_ident(c->source.segments[0])};
        if (auto* c = std::get_if<cmd::Cast>(&command)) {
            return {"CAST(" + sql_ident(c->source.segments[0]) + " AS " + sql_type(c->to.kind) + ")"};
        }
        if (auto* c = std::get_if<cmd::Add>(&command)) return sql_literal(check_literal(c->value, field));
        if (auto* c = std::get_if<cmd::Default>(&command)) {
            Sql lit = sql_literal(check_literal(c->value, field));
            return current ? Sql{"COALESCE(" + current->text + ", " + lit.text + ")"} : lit;
        }
        if (auto* c = std::get_if<cmd::Missing>(&command)) {
            throw CompileError("sql-view: command " + std::to_string(index + 1) + " (MISSING " + c->target.str() +
                               "): target field '" + c->target.str() +
                               "' has no mapping and a failing mapping cannot be deployed");
        }
        if (auto* c = std::get_if<cmd::Scale>(&command)) {
            return {current->operand() + " * " + sql_literal(Value{c->factor}).operand(), false};
        }
        if (auto* c = std::get_if<cmd::Shift>(&command)) {
            if (std::signbit(c->offset)) {
                return {current->operand() + " - " + format_double(-c->offset), false};
            }
            return {current->operand() + " + " + format_double(c->offset), false};
        }
        if (auto* c = std::get_if<cmd::Link>(&command)) {
            std::string out = "CASE " + current->text;
            for (const auto& [from, to] : c->table) {
                out += " WHEN " + sql_string(from) + " THEN " + sql_string(to);
            }
            out += " ELSE " + (c->fallback ? sql_string(*c->fallback) : std::string("NULL")) + " END";
            return {out};
        }
        if (auto* c = std::get_if<cmd::Apply>(&command)) {
            SqlExpr translator(Sql{sql_ident(c->source.segments[0])});
            return translator.translate(*resolve_apply(program.commands, index));
        }
        throw Untranslatable("unsupported command");
    }
};

}  // namespace

const std::vector<std::shared_ptr<const Backend>>& builtin_backends() {
    static const std::vector<std::shared_ptr<const Backend>> backends = {
        std::make_shared<PortableBackend>(), std::make_shared<PipelineBackend>(), std::make_shared<SqlBackend>()};
    return backends;
}

const Backend* find_backend(std::string_view name) {
    for (const auto& b : builtin_backends()) {
        if (b->name() == name) {
            return b.get();
        }
    }
    return nullptr;
}

CompiledArtifact compile(const StlProgram& program, const Schema& source, const Schema& target,
                         std::string_view backend) {
    const Backend* b = find_backend(backend);
    if (b == nullptr) {
        throw CompileError("unknown backend '" + std::string(backend) + "'");
    }
    auto diagnostics = validate_program(program, source, target);
    if (!diagnostics.empty()) {
        std::string message = "program does not validate (" + std::to_string(diagnostics.size()) + " diagnostic(s)):";
        for (const auto& d : diagnostics) {
            message += "\n  " + format_diagnostic(d);
        }
        throw CompileError(message);
    }
    return CompiledArtifact{std::string(b->name()), std::string(b->media_type()), b->emit(program, source, target)};
}

Value run_pipeline_expr(std::string_view body, const Value& record, const Schema& source, const Schema& target) {
    ExprPtr expr = parse_expr(body, Dialect::Pipeline);
    return conform_record(eval_expr(*expr, Value{}, record, &source), target);
}

}  // namespace gse
