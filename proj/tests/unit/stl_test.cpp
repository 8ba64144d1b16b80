#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "gse/error.hpp"
#include "gse/stl.hpp"
#include "printers.hpp"

namespace gse {
namespace {

std::string slurp(const std::string& rel) {
    std::ifstream in(std::string(GSE_FIXTURE_DIR) + "/" + rel);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kHeader = "source: {subject: a, version: 2}\ntarget: {subject: a, version: 1}\nmatch: {same_entity: true}\n";

StlProgram with_commands(const std::string& commands) {
    return parse_program(std::string(kHeader) + "commands:\n" + commands);
}

TEST(Stl, ParsesFixture) {
    StlProgram p = parse_program(slurp("motion/v2_to_v1.stl.yaml"));
    EXPECT_EQ(p.source, (SchemaRef{"motion", 2}));
    EXPECT_EQ(p.target, (SchemaRef{"motion", 1}));
    EXPECT_TRUE(p.match.same_entity);
    ASSERT_EQ(p.commands.size(), 10u);
    auto* rename = std::get_if<cmd::Rename>(&p.commands[1]);
    ASSERT_NE(rename, nullptr);
    EXPECT_EQ(rename->source.str(), "motion");
    EXPECT_EQ(rename->target.str(), "movement");
    auto* scale = std::get_if<cmd::Scale>(&p.commands[5]);
    ASSERT_NE(scale, nullptr);
    EXPECT_DOUBLE_EQ(scale->factor, 5.0 / 9.0);
    EXPECT_EQ(describe_command(p.commands[1]), "RENAME motion -> movement");
}

TEST(Stl, SerializeRoundTrips) {
    for (const char* f : {"motion/v2_to_v1.stl.yaml", "session/v2_to_v1.stl.yaml", "iot/hue_to_vivint.stl.yaml",
                          "iot/simplisafe_to_vivint.stl.yaml", "edge/v3_to_v2.stl.yaml"}) {
        StlProgram p = parse_program(slurp(f));
        EXPECT_EQ(parse_program(serialize_program(p)), p) << f;
    }
}

TEST(Stl, EveryCommandKind) {
    StlProgram p = with_commands(R"(  - copy: {source: a, target: b}
  - add: {target: c, value: 3}
  - cast: {source: d, target: d, to: float}
  - delete: {source: e}
  - rename: {source: f, target: g}
  - default: {target: c, value: 4}
  - missing: {target: h, reason: none}
  - scale: {target: b, factor: 2}
  - shift: {target: b, offset: -1.5}
  - link: {target: i, table: {x: y}, fallback: z}
  - gen: {name: twice, expr: value * 2}
  - apply: {source: j, target: k, fn: twice}
  - apply: {source: j, target: l, fn: 'value + 1'}
  - apply: {source: j, target: m, fn: abs}
)");
    ASSERT_EQ(p.commands.size(), 14u);
    std::vector<std::string> names;
    for (const auto& c : p.commands) {
        names.emplace_back(command_name(c));
    }
    EXPECT_EQ(names, (std::vector<std::string>{"COPY", "ADD", "CAST", "DELETE", "RENAME", "DEFAULT", "MISSING",
                                               "SCALE", "SHIFT", "LINK", "GEN", "APPLY", "APPLY", "APPLY"}));
    EXPECT_EQ(command_keyword(p.commands[9]), "link");
    EXPECT_TRUE(is_producer(p.commands[0]));
    EXPECT_TRUE(is_value_transform(p.commands[7]));
    EXPECT_FALSE(is_producer(p.commands[3]));
    EXPECT_FALSE(std::get<cmd::Apply>(p.commands[11]).is_inline());
    EXPECT_TRUE(std::get<cmd::Apply>(p.commands[12]).is_inline());
    EXPECT_EQ(command_source(p.commands[4])->str(), "f");
    EXPECT_EQ(command_target(p.commands[4])->str(), "g");
    EXPECT_FALSE(command_target(p.commands[3]).has_value());
}

TEST(Stl, ResolveApply) {
    StlProgram p = with_commands(R"(  - apply: {source: a, target: b, fn: twice}
  - gen: {name: twice, expr: value * 2}
  - apply: {source: a, target: b, fn: twice}
  - apply: {source: a, target: b, fn: round}
)");
    EXPECT_EQ(resolve_apply(p.commands, 0), nullptr);
    ASSERT_NE(resolve_apply(p.commands, 2), nullptr);
    EXPECT_EQ(print_expr(*resolve_apply(p.commands, 2)), "value * 2");
    EXPECT_EQ(print_expr(*resolve_apply(p.commands, 3)), "round(value)");
}

TEST(Stl, RejectsMalformedPrograms) {
    EXPECT_THROW(parse_program("commands: []"), ParseError);
    EXPECT_THROW(parse_program(std::string(kHeader) + "extra: 1\ncommands: []"), ParseError);
    EXPECT_THROW(with_commands("  - frobnicate: {target: a}\n"), ParseError);
    EXPECT_THROW(with_commands("  - copy: {source: a}\n"), ParseError);
    EXPECT_THROW(with_commands("  - copy: {source: a, target: b, extra: c}\n"), ParseError);
    EXPECT_THROW(with_commands("  - scale: {target: a, factor: 0}\n"), ParseError);
    EXPECT_THROW(with_commands("  - link: {target: a, table: {}}\n"), ParseError);
    EXPECT_THROW(with_commands("  - gen: {name: value, expr: '1'}\n"), ParseError);
    EXPECT_THROW(with_commands("  - gen: {name: f, expr: '1 +'}\n"), ParseError);
    EXPECT_THROW(with_commands("  - gen: {name: f, expr: '1'}\n  - gen: {name: f, expr: '2'}\n"), ParseError);
    EXPECT_THROW(with_commands("  - match: {same_entity: true}\n"), ParseError);
    EXPECT_THROW(with_commands("  - copy: {source: 'a..b', target: b}\n"), ParseError);
    EXPECT_THROW(with_commands("  - add: {target: a}\n"), ParseError);
}

TEST(Stl, DocumentFormIsStable) {
    StlProgram p = with_commands("  - link: {target: s, table: {b: x, a: y}}\n");
    Document doc = program_to_document(p);
    EXPECT_EQ(doc["commands"][0]["link"]["table"].begin().key(), "b");
    EXPECT_EQ(program_from_document(doc), p);
}

TEST(Stl, LinkLookup) {
    cmd::Link link{FieldPath::parse("s"), {{"a", "x"}}, std::nullopt};
    ASSERT_NE(link.lookup("a"), nullptr);
    EXPECT_EQ(*link.lookup("a"), "x");
    EXPECT_EQ(link.lookup("b"), nullptr);
}

}  // namespace
}  // namespace gse
