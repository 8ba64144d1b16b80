#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gse/document.hpp"
#include "gse/expr.hpp"
#include "gse/schema.hpp"
#include "gse/value.hpp"

namespace gse {

namespace cmd {

struct Match {
    bool same_entity = true;
    std::string reason;

    friend bool operator==(const Match&, const Match&) = default;
};

struct Copy {
    FieldPath source;
    FieldPath target;

    friend bool operator==(const Copy&, const Copy&) = default;
};

struct Add {
    FieldPath target;
    Value value;

    friend bool operator==(const Add&, const Add&) = default;
};

struct Cast {
    FieldPath source;
    FieldPath target;
    FieldType to;

    friend bool operator==(const Cast&, const Cast&) = default;
};

struct Delete {
    FieldPath source;

    friend bool operator==(const Delete&, const Delete&) = default;
};

struct Rename {
    FieldPath source;
    FieldPath target;

    friend bool operator==(const Rename&, const Rename&) = default;
};

/// Writes `value` only when the target is absent or null.
struct Default {
    FieldPath target;
    Value value;

    friend bool operator==(const Default&, const Default&) = default;
};

/// Producer that fails at runtime: no mapping exists for the target.
struct Missing {
    FieldPath target;
    std::string reason;

    friend bool operator==(const Missing&, const Missing&) = default;
};

struct Scale {
    FieldPath target;
    double factor = 1.0;

    friend bool operator==(const Scale&, const Scale&) = default;
};

struct Shift {
    FieldPath target;
    double offset = 0.0;

    friend bool operator==(const Shift&, const Shift&) = default;
};

struct Link {
    FieldPath target;
    std::vector<std::pair<std::string, std::string>> table;
    std::optional<std::string> fallback;

    const std::string* lookup(std::string_view symbol) const;

    friend bool operator==(const Link&, const Link&) = default;
};

struct Gen {
    std::string name;
    ExprPtr expr;

    friend bool operator==(const Gen& lhs, const Gen& rhs) {
        return lhs.name == rhs.name && same_expr(lhs.expr, rhs.expr);
    }
};

/// `fn` is either a name (a prior GEN or a unary builtin) or an inline
/// expression; exactly one of `name` / `expr` is set.
struct Apply {
    FieldPath source;
    FieldPath target;
    std::string name;
    ExprPtr expr;

    bool is_inline() const noexcept { return expr != nullptr; }

    friend bool operator==(const Apply& lhs, const Apply& rhs) {
        return lhs.source == rhs.source && lhs.target == rhs.target && lhs.name == rhs.name &&
               same_expr(lhs.expr, rhs.expr);
    }
};

}  // namespace cmd

using StlCommand = std::variant<cmd::Copy, cmd::Add, cmd::Cast, cmd::Delete, cmd::Rename, cmd::Default,
                                cmd::Missing, cmd::Scale, cmd::Shift, cmd::Link, cmd::Gen, cmd::Apply>;

/// Uppercase name, as used in diagnostics.
std::string_view command_name(const StlCommand& command) noexcept;
/// Lowercase name, as used in documents and tool names.
std::string command_keyword(const StlCommand& command);

std::optional<FieldPath> command_source(const StlCommand& command);
std::optional<FieldPath> command_target(const StlCommand& command);

/// Producers write a target path; value transforms rewrite one in place.
bool is_producer(const StlCommand& command) noexcept;
bool is_value_transform(const StlCommand& command) noexcept;

struct SchemaRef {
    std::string subject;
    std::int64_t version = 1;

    friend bool operator==(const SchemaRef&, const SchemaRef&) = default;
};

struct StlProgram {
    SchemaRef source;
    SchemaRef target;
    cmd::Match match;
    std::vector<StlCommand> commands;

    bool aborts() const noexcept { return !match.same_entity; }

    friend bool operator==(const StlProgram&, const StlProgram&) = default;
};

/// Throws ParseError: syntax, unknown command, missing or unknown parameter,
/// invalid inline expression, or a violated command invariant.
StlProgram parse_program(std::string_view text);
StlProgram program_from_document(const Document& doc);
Document program_to_document(const StlProgram& program);
std::string serialize_program(const StlProgram& program);

/// Builds one command from its lowercase keyword and parameter map. Shared by
/// the document parser and the tool-call protocol. `match` is not accepted.
StlCommand command_from_document(std::string_view keyword, const Document& params);
cmd::Match match_from_document(const Document& params);
/// Parameter map in the fixed per-command key order.
Document command_to_document(const StlCommand& command);

/// The expression APPLY evaluates: the inline expression, the body of the
/// named GEN, or a call of the named builtin on `value`. nullptr when the name
/// does not resolve among `commands[0, index)`.
ExprPtr resolve_apply(const std::vector<StlCommand>& commands, std::size_t index);

/// Single-line rendering for diagnostics and logs, e.g. `RENAME motion -> movement`.
std::string describe_command(const StlCommand& command);

}  // namespace gse
