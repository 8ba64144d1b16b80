#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include "gse/schema.hpp"
#include "gse/stl.hpp"
#include "gse/validate.hpp"
#include "printers.hpp"

namespace gse {
namespace {

std::string slurp(const std::string& rel) {
    std::ifstream in(std::string(GSE_FIXTURE_DIR) + "/" + rel);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const Schema& src() {
    static const Schema s = parse_schema(R"(subject: a
version: 2
fields:
  - {name: id, type: string}
  - {name: ms, type: integer, unit: ms}
  - {name: mode, type: enum, variants: [on, off, auto]}
  - {name: note, type: string, optional: true}
)");
    return s;
}

const Schema& tgt() {
    static const Schema s = parse_schema(R"(subject: a
version: 1
fields:
  - {name: id, type: string}
  - {name: secs, type: float, unit: s}
  - {name: state, type: enum, variants: [up, down]}
  - {name: note, type: string}
)");
    return s;
}

std::vector<Diagnostic> check(const std::string& commands) {
    StlProgram p = parse_program(
        "source: {subject: a, version: 2}\ntarget: {subject: a, version: 1}\nmatch: {same_entity: true}\ncommands:\n" +
        commands);
    return validate_program(p, src(), tgt());
}

std::vector<std::string> codes(const std::vector<Diagnostic>& ds) {
    std::vector<std::string> out;
    for (const auto& d : ds) {
        out.push_back(d.code);
    }
    return out;
}

const std::string kClean = R"(  - copy: {source: id, target: id}
  - rename: {source: ms, target: secs}
  - scale: {target: secs, factor: 0.001}
  - rename: {source: mode, target: state}
  - link: {target: state, table: {on: up, off: down}, fallback: down}
  - copy: {source: note, target: note}
  - default: {target: note, value: ''}
)";

TEST(Validate, CleanProgramHasNoDiagnostics) {
    auto ds = check(kClean);
    EXPECT_TRUE(ds.empty()) << (ds.empty() ? "" : format_diagnostic(ds[0]));
}

TEST(Validate, FixturesAreClean) {
    struct Case {
        const char *source, *target, *program;
    };
    for (auto c : {Case{"motion/v2.schema.yaml", "motion/v1.schema.yaml", "motion/v2_to_v1.stl.yaml"},
                   Case{"session/source.schema.yaml", "session/target.schema.yaml", "session/v2_to_v1.stl.yaml"},
                   Case{"iot/hue.schema.yaml", "iot/vivint.schema.yaml", "iot/hue_to_vivint.stl.yaml"},
                   Case{"iot/simplisafe.schema.yaml", "iot/hue.schema.yaml", "iot/simplisafe_to_hue.stl.yaml"},
                   Case{"edge/source.schema.yaml", "edge/target.schema.yaml", "edge/v3_to_v2.stl.yaml"}}) {
        auto ds = validate_program(parse_program(slurp(c.program)), parse_schema(slurp(c.source)),
                                   parse_schema(slurp(c.target)));
        EXPECT_TRUE(ds.empty()) << c.program << ": " << (ds.empty() ? "" : format_diagnostic(ds[0]));
    }
}

TEST(Validate, UnknownPathsAndCoverage) {
    auto ds = check(R"(  - copy: {source: idd, target: id}
  - rename: {source: ms, target: seconds}
)");
    auto cs = codes(ds);
    EXPECT_NE(std::find(cs.begin(), cs.end(), "unknown-source-path"), cs.end());
    EXPECT_NE(std::find(cs.begin(), cs.end(), "unknown-target-path"), cs.end());
    EXPECT_NE(std::find(cs.begin(), cs.end(), "uncovered-target"), cs.end());
    EXPECT_NE(std::find(cs.begin(), cs.end(), "unconsumed-source"), cs.end());
    EXPECT_EQ(ds[0].command_index, 0u);
}

TEST(Validate, ConflictingProducers) {
    auto ds = check(kClean + "  - add: {target: id, value: x}\n");
    ASSERT_EQ(codes(ds), std::vector<std::string>{"conflict"});
    EXPECT_EQ(ds[0].path, "id");
    EXPECT_EQ(ds[0].command_index, 7u);
}

TEST(Validate, TransformBeforeProducer) {
    auto ds = check(R"(  - copy: {source: id, target: id}
  - scale: {target: secs, factor: 0.001}
  - rename: {source: ms, target: secs}
  - rename: {source: mode, target: state}
  - link: {target: state, table: {on: up, off: down}, fallback: down}
  - copy: {source: note, target: note}
  - default: {target: note, value: ''}
)");
    ASSERT_EQ(codes(ds), std::vector<std::string>{"transform-order"});
    EXPECT_EQ(ds[0].command_index, 1u);
}

TEST(Validate, NullableNeedsDefault) {
    auto ds = check(R"(  - copy: {source: id, target: id}
  - rename: {source: ms, target: secs}
  - rename: {source: mode, target: state}
  - link: {target: state, table: {on: up, off: down}, fallback: down}
  - copy: {source: note, target: note}
)");
    EXPECT_EQ(codes(ds), std::vector<std::string>{"nullable"});
}

TEST(Validate, EnumWithoutLinkIsTypeError) {
    auto ds = check(R"(  - copy: {source: id, target: id}
  - rename: {source: ms, target: secs}
  - rename: {source: mode, target: state}
  - copy: {source: note, target: note}
  - default: {target: note, value: ''}
)");
    EXPECT_EQ(codes(ds), std::vector<std::string>{"type"});
}

TEST(Validate, LinkChecks) {
    auto ds = check(R"(  - copy: {source: id, target: id}
  - rename: {source: ms, target: secs}
  - rename: {source: mode, target: state}
  - link: {target: state, table: {on: up, dim: down, off: sideways}, fallback: nowhere}
  - copy: {source: note, target: note}
  - default: {target: note, value: ''}
)");
    ASSERT_EQ(ds.size(), 3u);
    for (const auto& d : ds) {
        EXPECT_EQ(d.code, "type");
        EXPECT_EQ(d.command_index, 3u);
    }
}

TEST(Validate, EnumIntoStringNeedsToString) {
    // Source `note` is left unconsumed throughout; only type codes matter here.
    auto type_codes = [](const std::string& apply) {
        auto ds = check(R"(  - copy: {source: id, target: id}
  - rename: {source: ms, target: secs}
  - rename: {source: mode, target: state}
  - link: {target: state, table: {on: up, off: down}, fallback: down}
)" + apply);
        std::vector<Diagnostic> out;
        std::copy_if(ds.begin(), ds.end(), std::back_inserter(out),
                     [](const Diagnostic& d) { return d.code != "unconsumed-source"; });
        return out;
    };
    auto bare = type_codes("  - apply: {source: mode, target: note, fn: value}\n");
    ASSERT_EQ(codes(bare), std::vector<std::string>{"type"});
    EXPECT_NE(bare[0].message.find("enum"), std::string::npos);
    EXPECT_EQ(codes(type_codes("  - apply: {source: id, target: note, fn: 'if(src.mode == \"on\", src.mode, value)'}\n")),
              std::vector<std::string>{"type"});
    EXPECT_TRUE(type_codes("  - apply: {source: mode, target: note, fn: 'to_string(value)'}\n").empty());
    EXPECT_TRUE(type_codes("  - apply: {source: mode, target: note, fn: 'upper(value)'}\n").empty());
}

TEST(Validate, ScaleOnIntegerNeedsIntegralFactor) {
    Schema t = tgt();
    t.fields[1].type = FieldType::scalar(TypeKind::Integer);
    StlProgram p = parse_program(
        "source: {subject: a, version: 2}\ntarget: {subject: a, version: 1}\nmatch: {same_entity: true}\ncommands:\n" +
        kClean);
    auto ds = validate_program(p, src(), t);
    ASSERT_EQ(codes(ds), std::vector<std::string>{"type"});
    EXPECT_EQ(ds[0].command_index, 2u);
}

TEST(Validate, ApplyChecks) {
    auto unresolved = check(R"(  - copy: {source: id, target: id}
  - apply: {source: ms, target: secs, fn: later}
  - gen: {name: later, expr: value / 1000}
  - rename: {source: mode, target: state}
  - link: {target: state, table: {on: up, off: down}, fallback: down}
  - copy: {source: note, target: note}
  - default: {target: note, value: ''}
)");
    EXPECT_EQ(codes(unresolved), std::vector<std::string>{"unresolved-fn"});

    auto mistyped = check(R"(  - copy: {source: id, target: id}
  - apply: {source: ms, target: secs, fn: 'concat(value, "s")'}
  - rename: {source: mode, target: state}
  - link: {target: state, table: {on: up, off: down}, fallback: down}
  - copy: {source: note, target: note}
  - default: {target: note, value: ''}
)");
    EXPECT_EQ(codes(mistyped), std::vector<std::string>{"type"});

    auto symbols = check(R"(  - copy: {source: id, target: id}
  - apply: {source: ms, target: secs, fn: 'value / 1000'}
  - apply: {source: mode, target: state, fn: 'if(value == "on", "up", "down")'}
  - copy: {source: note, target: note}
  - default: {target: note, value: ''}
)");
    EXPECT_TRUE(symbols.empty()) << (symbols.empty() ? "" : format_diagnostic(symbols[0]));

    auto bad_symbol = check(R"(  - copy: {source: id, target: id}
  - apply: {source: ms, target: secs, fn: 'value / 1000'}
  - apply: {source: mode, target: state, fn: 'if(value == "on", "up", "left")'}
  - copy: {source: note, target: note}
  - default: {target: note, value: ''}
)");
    EXPECT_EQ(codes(bad_symbol), std::vector<std::string>{"type"});
}

TEST(Validate, DuplicateRename) {
    auto ds = check(kClean + "  - rename: {source: id, target: note}\n  - rename: {source: id, target: note}\n");
    auto cs = codes(ds);
    EXPECT_NE(std::find(cs.begin(), cs.end(), "duplicate-rename"), cs.end());
}

TEST(Validate, AbortMustBeEmpty) {
    StlProgram p = parse_program(
        "source: {subject: a, version: 2}\ntarget: {subject: a, version: 1}\nmatch: {same_entity: false}\ncommands:\n"
        "  - delete: {source: id}\n");
    auto ds = validate_program(p, src(), tgt());
    ASSERT_FALSE(ds.empty());
    EXPECT_EQ(ds[0].code, "abort-with-commands");
    p.commands.clear();
    EXPECT_TRUE(validate_program(p, src(), tgt()).empty());
}

TEST(Validate, CastChecks) {
    auto ds = check(R"(  - copy: {source: id, target: id}
  - cast: {source: ms, target: secs, to: integer}
  - rename: {source: mode, target: state}
  - link: {target: state, table: {on: up, off: down}, fallback: down}
  - copy: {source: note, target: note}
  - default: {target: note, value: ''}
)");
    EXPECT_EQ(codes(ds), std::vector<std::string>{"type"});
}

TEST(Validate, Deterministic) {
    auto a = check("  - copy: {source: zz, target: id}\n");
    auto b = check("  - copy: {source: zz, target: id}\n");
    EXPECT_EQ(a, b);
}

TEST(Validate, FormatDiagnostic) {
    Diagnostic d{"type", "bad", "x.y", 2};
    EXPECT_EQ(format_diagnostic(d), "[type] x.y: bad (command 3)");
    EXPECT_EQ(diagnostic_from_document(diagnostic_to_document(d)), d);
}

TEST(Castable, Table) {
    EXPECT_TRUE(castable(TypeKind::Integer, TypeKind::Float));
    EXPECT_TRUE(castable(TypeKind::String, TypeKind::Enum));
    EXPECT_FALSE(castable(TypeKind::Enum, TypeKind::String));
    EXPECT_FALSE(castable(TypeKind::Boolean, TypeKind::Integer));
    EXPECT_FALSE(castable(TypeKind::Object, TypeKind::String));
}

}  // namespace
}  // namespace gse
