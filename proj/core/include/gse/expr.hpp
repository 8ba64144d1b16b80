#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gse/schema.hpp"
#include "gse/value.hpp"

namespace gse {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class UnaryOp { Neg, Not };
enum class BinaryOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

namespace ast {

struct Literal {
    Value value;
};

/// The reserved input variable `value`.
struct ValueRef {};

/// `src.<path>`: a read from the source record.
struct SourceRef {
    FieldPath path;
};

struct Unary {
    UnaryOp op;
    ExprPtr operand;
};

struct Binary {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};

/// Builtin call; `if` and `bind` are lazy special forms.
struct Call {
    std::string name;
    std::vector<ExprPtr> args;
};

/// `{name: expr, ...}`, pipeline dialect only.
struct Record {
    std::vector<std::pair<std::string, ExprPtr>> fields;
};

}  // namespace ast

struct Expr {
    std::variant<ast::Literal, ast::ValueRef, ast::SourceRef, ast::Unary, ast::Binary, ast::Call, ast::Record> node;
};

bool operator==(const Expr& lhs, const Expr& rhs);
/// Deep comparison that tolerates null pointers.
bool same_expr(const ExprPtr& lhs, const ExprPtr& rhs);

/// `Transform` is the language available to GEN/APPLY. `Pipeline` adds the
/// record constructor, `null`, and the whole-record builtins used by compiled
/// artifacts (cast, scale, shift, link, link_or, coalesce, bind, fail_abort,
/// fail_mapping).
enum class Dialect { Transform, Pipeline };

/// Precedence, loosest first: `or`, `and`, `not`, comparisons, `+ -`,
/// `* / %`, unary minus. A minus directly before a numeric literal folds into
/// a negative literal. `#` starts a comment running to end of line.
/// Throws ParseError on syntax errors, unknown functions and wrong arity.
ExprPtr parse_expr(std::string_view text, Dialect dialect = Dialect::Transform);

enum class PrintStyle { Minimal, FullyParenthesized };

/// Prints an expression that parses back to an equal tree.
std::string print_expr(const Expr& expr, PrintStyle style = PrintStyle::Minimal);

struct BuiltinInfo {
    std::string_view name;
    std::size_t min_arity;
    std::size_t max_arity;  // SIZE_MAX for variadic
    Dialect dialect;
};

/// nullptr when `name` is not a builtin visible in `dialect`.
const BuiltinInfo* find_builtin(std::string_view name, Dialect dialect = Dialect::Transform);
/// True when the builtin accepts exactly one argument (usable as APPLY.fn).
bool is_unary_builtin(std::string_view name);
/// Words that may not name a GEN function.
bool is_reserved_word(std::string_view name);

/// Evaluates with `value` bound to the input and `src.<path>` reading from
/// `source`. When `source_schema` is given, absent optional fields read as
/// their declared default (or null) and absent required fields raise
/// PathError; without it absent fields read as null.
///
/// Integer `+ - * %` stay integer (overflow raises EvalError); `/` always
/// yields a float; mixed integer/float promotes to float. Throws
/// TransformError.
Value eval_expr(const Expr& expr, const Value& value, const Value& source, const Schema* source_schema = nullptr);

/// Reads a source path with the semantics described for eval_expr.
Value read_path(const Value& record, const FieldPath& path, const Schema* schema);

/// Applies `factor` to a numeric value. Integers stay integer only when the
/// factor is integral and the product is exact.
Value scale_number(const Value& current, double factor);
/// Adds `offset` under the same integer rule as scale_number.
Value shift_number(const Value& current, double offset);

// ---- static typing -------------------------------------------------------

/// Bit set of the value kinds an expression may produce.
enum TypeBits : unsigned {
    kTypeInt = 1u << 0,
    kTypeFloat = 1u << 1,
    kTypeString = 1u << 2,
    kTypeBool = 1u << 3,
    kTypeObject = 1u << 4,
    kTypeNull = 1u << 5,
    kTypeEnum = 1u << 6,  ///< enum symbol; accepted wherever text is, but only to_string makes it a string
};
using TypeSet = unsigned;

TypeSet type_bits(TypeKind kind);
std::string describe_type_set(TypeSet set);

/// Over-approximates the kinds `expr` can evaluate to, given the kinds of
/// `value`. Operations that fail at runtime on every input contribute nothing,
/// so an empty set means the expression can never produce a value.
TypeSet infer_type(const Expr& expr, TypeSet value_type, const Schema& source);

/// Every `src.<path>` read in the expression, in source order.
std::vector<FieldPath> source_refs(const Expr& expr);

/// Every string the expression can evaluate to, when its result is a string
/// literal or an `if` whose branches are; nullopt otherwise.
std::optional<std::vector<std::string>> literal_results(const Expr& expr);

}  // namespace gse
