#include <algorithm>

#include "gse/expr.hpp"

namespace gse {

namespace {

constexpr TypeSet kNumeric = kTypeInt | kTypeFloat;
constexpr TypeSet kText = kTypeString | kTypeEnum;
constexpr TypeSet kAny = kTypeInt | kTypeFloat | kTypeString | kTypeBool | kTypeObject | kTypeNull | kTypeEnum;

/// Result kinds of `+ - * %` (and min/max over two operands).
TypeSet arithmetic_result(TypeSet a, TypeSet b) {
    TypeSet out = 0;
    if ((a & kTypeInt) && (b & kTypeInt)) {
        out |= kTypeInt;
    }
    if (((a & kTypeFloat) && (b & kNumeric)) || ((b & kTypeFloat) && (a & kNumeric))) {
        out |= kTypeFloat;
    }
    return out;
}

class Typer {
public:
    Typer(TypeSet value_type, const Schema& source) : value_(value_type), source_(source) {}

    TypeSet infer(const Expr& e) {
        return std::visit([&](const auto& n) { return node(n); }, e.node);
    }

private:
    TypeSet node(const ast::Literal& n) {
        switch (n.value.kind()) {
            case ValueKind::Null: return kTypeNull;
            case ValueKind::Boolean: return kTypeBool;
            case ValueKind::Integer: return kTypeInt;
            case ValueKind::Float: return kTypeFloat;
            case ValueKind::String: return kTypeString;
            case ValueKind::Enum: return kTypeEnum;
            case ValueKind::Object: return kTypeObject;
        }
        return kAny;
    }

    TypeSet node(const ast::ValueRef&) { return value_; }

    TypeSet node(const ast::SourceRef& n) {
        const Field* field = source_.find(n.path);
        if (field == nullptr) {
            return kAny;
        }
        return type_bits(field->type.kind) | (source_.nullable(n.path) ? kTypeNull : 0u);
    }

    TypeSet node(const ast::Unary& n) {
        TypeSet a = infer(*n.operand);
        if (n.op == UnaryOp::Not) {
            return (a & kTypeBool) ? kTypeBool : 0u;
        }
        return a & kNumeric;
    }

    TypeSet node(const ast::Binary& n) {
        TypeSet a = infer(*n.lhs);
        TypeSet b = infer(*n.rhs);
        switch (n.op) {
            case BinaryOp::Add:
            case BinaryOp::Sub:
            case BinaryOp::Mul:
            case BinaryOp::Mod: return arithmetic_result(a, b);
            case BinaryOp::Div: return ((a & kNumeric) && (b & kNumeric)) ? kTypeFloat : 0u;
            case BinaryOp::Eq:
            case BinaryOp::Ne: return (a && b) ? kTypeBool : 0u;
            case BinaryOp::Lt:
            case BinaryOp::Le:
            case BinaryOp::Gt:
            case BinaryOp::Ge: {
                bool ok = ((a & kNumeric) && (b & kNumeric)) || ((a & kText) && (b & kText));
                return ok ? kTypeBool : 0u;
            }
            case BinaryOp::And:
            case BinaryOp::Or: return ((a & kTypeBool) && (b & kTypeBool)) ? kTypeBool : 0u;
        }
        return 0;
    }

    TypeSet node(const ast::Record&) { return kTypeObject; }

    TypeSet node(const ast::Call& n) {
        std::vector<TypeSet> args;
        args.reserve(n.args.size());
        for (const auto& a : n.args) {
            args.push_back(infer(*a));
        }
        const std::string& fn = n.name;
        auto all = [&](TypeSet mask) {
            for (TypeSet t : args) {
                if (!(t & mask)) {
                    return false;
                }
            }
            return true;
        };
        if (fn == "if") {
            return (args[0] & kTypeBool) ? (args[1] | args[2]) : 0u;
        }
        if (fn == "round" || fn == "floor" || fn == "ceil") {
            return (args[0] & kNumeric) ? kTypeInt : 0u;
        }
        if (fn == "abs") {
            return args[0] & kNumeric;
        }
        if (fn == "min" || fn == "max") {
            if (!all(kNumeric)) {
                return 0;
            }
            TypeSet out = all(kTypeInt) ? kTypeInt : 0u;
            for (TypeSet t : args) {
                if (t & kTypeFloat) {
                    out |= kTypeFloat;
                }
            }
            return out;
        }
        if (fn == "concat" || fn == "lower" || fn == "upper") {
            return all(kText) ? kTypeString : 0u;
        }
        if (fn == "substr") {
            return ((args[0] & kText) && (args[1] & kTypeInt) && (args[2] & kTypeInt)) ? kTypeString : 0u;
        }
        if (fn == "to_string") {
            return (args[0] & (kNumeric | kText | kTypeBool)) ? kTypeString : 0u;
        }
        if (fn == "to_number") {
            TypeSet out = args[0] & kNumeric;
            if (args[0] & kText) {
                out |= kNumeric;
            }
            return out;
        }
        if (fn == "to_boolean") {
            return (args[0] & (kNumeric | kText | kTypeBool)) ? kTypeBool : 0u;
        }
        // Pipeline builtins are not statically typed.
        return kAny;
    }

    TypeSet value_;
    const Schema& source_;
};

void collect_refs(const Expr& e, std::vector<FieldPath>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, ast::SourceRef>) {
                out.push_back(n.path);
            } else if constexpr (std::is_same_v<T, ast::Unary>) {
                collect_refs(*n.operand, out);
            } else if constexpr (std::is_same_v<T, ast::Binary>) {
                collect_refs(*n.lhs, out);
                collect_refs(*n.rhs, out);
            } else if constexpr (std::is_same_v<T, ast::Call>) {
                for (const auto& a : n.args) {
                    collect_refs(*a, out);
                }
            } else if constexpr (std::is_same_v<T, ast::Record>) {
                for (const auto& [key, value] : n.fields) {
                    collect_refs(*value, out);
                }
            }
        },
        e.node);
}

}  // namespace

TypeSet type_bits(TypeKind kind) {
    switch (kind) {
        case TypeKind::String: return kTypeString;
        case TypeKind::Enum: return kTypeEnum;
        case TypeKind::Integer: return kTypeInt;
        case TypeKind::Float: return kTypeFloat;
        case TypeKind::Boolean: return kTypeBool;
        case TypeKind::Object: return kTypeObject;
    }
    return 0;
}

std::string describe_type_set(TypeSet set) {
    if (set == 0) {
        return "nothing";
    }
    static const std::pair<TypeBits, const char*> names[] = {
        {kTypeInt, "integer"}, {kTypeFloat, "float"},   {kTypeString, "string"},
        {kTypeBool, "boolean"}, {kTypeObject, "object"}, {kTypeNull, "null"},  {kTypeEnum, "enum"},
    };
    std::string out;
    for (const auto& [bit, name] : names) {
        if (set & bit) {
            if (!out.empty()) {
                out += "|";
            }
            out += name;
        }
    }
    return out;
}

TypeSet infer_type(const Expr& expr, TypeSet value_type, const Schema& source) {
    Typer typer(value_type, source);
    return typer.infer(expr);
}

std::vector<FieldPath> source_refs(const Expr& expr) {
    std::vector<FieldPath> out;
    collect_refs(expr, out);
    return out;
}

std::optional<std::vector<std::string>> literal_results(const Expr& expr) {
    if (const auto* lit = std::get_if<ast::Literal>(&expr.node)) {
        if (lit->value.kind() == ValueKind::String) {
            return std::vector<std::string>{lit->value.text()};
        }
        return std::nullopt;
    }
    const auto* call = std::get_if<ast::Call>(&expr.node);
    if (call == nullptr || call->name != "if" || call->args.size() != 3) {
        return std::nullopt;
    }
    auto yes = literal_results(*call->args[1]);
    auto no = literal_results(*call->args[2]);
    if (!yes || !no) {
        return std::nullopt;
    }
    for (auto& s : *no) {
        if (std::find(yes->begin(), yes->end(), s) == yes->end()) {
            yes->push_back(std::move(s));
        }
    }
    return yes;
}

}  // namespace gse
