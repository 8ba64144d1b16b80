#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "generators.hpp"
#include "gse/assembler.hpp"
#include "gse/error.hpp"
#include "gse/eval.hpp"
#include "gse/interpreter.hpp"
#include "gse/planner.hpp"
#include "gse/registry.hpp"
#include "gse/units.hpp"
#include "gse/validate.hpp"
#include "oracles.hpp"

namespace gse {
namespace {

using testing::Rng;
namespace fs = std::filesystem;

constexpr int kRuns = 1000;

bool has_missing(const StlProgram& p) {
    for (const auto& c : p.commands) {
        if (std::holds_alternative<cmd::Missing>(c)) {
            return true;
        }
    }
    return false;
}

bool has_defaults(const std::vector<Field>& fields) {
    for (const auto& f : fields) {
        if (f.default_value || (f.type.kind == TypeKind::Object && has_defaults(f.type.fields))) {
            return true;
        }
    }
    return false;
}

struct Case {
    Schema source;
    Schema target;
    StlProgram program;
};

/// A program that validates cleanly: either the heuristic plan for an evolved
/// schema or a noisy mapping that happened to come out clean.
std::optional<Case> clean_case(Rng& rng) {
    Schema source = testing::chance(rng, 0.5) ? testing::unit_schema(rng) : testing::schema(rng, 6, 1);
    Schema target = testing::evolve(rng, source);
    StlProgram p = testing::candidate_mapping(rng, source, target);
    if (!validate_program(p, source, target).empty()) {
        return std::nullopt;
    }
    return Case{std::move(source), std::move(target), std::move(p)};
}

/// Outcome of running a mapping: the output or the failure kind.
struct Outcome {
    std::optional<Value> value;
    std::optional<TransformErrorKind> error;
    std::string detail;
};

template <typename Fn>
Outcome run(Fn&& fn) {
    Outcome o;
    try {
        o.value = fn();
    } catch (const TransformError& e) {
        o.error = e.kind();
        o.detail = e.what();
    }
    return o;
}

TEST(Property, SchemaRoundTrip) {
    Rng rng(11);
    for (int i = 0; i < kRuns; ++i) {
        Schema s = testing::schema(rng);
        std::string text = serialize_schema(s);
        Schema back = parse_schema(text);
        ASSERT_EQ(back, s) << text;
        ASSERT_EQ(fingerprint(back), fingerprint(s));
        ASSERT_EQ(serialize_schema(back), text);
    }
}

TEST(Property, ProgramRoundTrip) {
    Rng rng(12);
    for (int i = 0; i < kRuns; ++i) {
        StlProgram p = testing::program(rng);
        std::string text = serialize_program(p);
        ASSERT_EQ(parse_program(text), p) << text;
        ASSERT_EQ(program_from_document(program_to_document(p)), p) << text;
    }
}

TEST(Property, ExpressionPrintParse) {
    Rng rng(13);
    for (int i = 0; i < kRuns; ++i) {
        ExprPtr e = testing::expression(rng, 4);
        for (auto style : {PrintStyle::Minimal, PrintStyle::FullyParenthesized}) {
            std::string text = print_expr(*e, style);
            ExprPtr back = parse_expr(text);
            ASSERT_TRUE(same_expr(back, e)) << text << " -> " << print_expr(*back, style);
        }
    }
}

TEST(Property, PortableCompileReparses) {
    Rng rng(14);
    int compiled = 0;
    for (int attempt = 0; attempt < 50 * kRuns && compiled < kRuns; ++attempt) {
        auto c = clean_case(rng);
        if (!c) {
            continue;
        }
        CompiledArtifact a = compile(c->program, c->source, c->target, "portable");
        ASSERT_EQ(parse_program(a.body), c->program) << a.body;
        ++compiled;
    }
    EXPECT_GE(compiled, kRuns);
}

TEST(Property, RecordRoundTrip) {
    Rng rng(15);
    for (int i = 0; i < kRuns; ++i) {
        Schema s = testing::schema(rng);
        Value rec = testing::record(rng, s);
        Value conformed = conform_record(rec, s);
        std::string text = serialize_record(conformed);
        ASSERT_EQ(parse_record(text, s), conformed) << text;
        ASSERT_EQ(conform_record(conformed, s), conformed);
    }
}

TEST(Property, CleanProgramsNeverHitPathOrConformanceErrors) {
    Rng rng(16);
    int programs = 0;
    int successes = 0;
    for (int attempt = 0; attempt < 20000 && programs < 400; ++attempt) {
        auto c = clean_case(rng);
        if (!c || has_missing(c->program) || c->program.aborts()) {
            continue;
        }
        ++programs;
        for (int r = 0; r < 20; ++r) {
            Value rec = conform_record(testing::record(rng, c->source), c->source);
            Outcome o = run([&] { return transform(c->program, rec, c->source, c->target); });
            if (o.value) {
                ++successes;
                ASSERT_EQ(conform_record(*o.value, c->target), *o.value);
                continue;
            }
            ASSERT_NE(*o.error, TransformErrorKind::PathError)
                << o.detail << "\n" << serialize_program(c->program) << serialize_record(rec);
            ASSERT_EQ(o.detail.find("does not conform"), std::string::npos)
                << o.detail << "\n" << serialize_program(c->program) << serialize_record(rec);
            ASSERT_NE(*o.error, TransformErrorKind::Abort);
            ASSERT_NE(*o.error, TransformErrorKind::MappingFailure);
        }
    }
    EXPECT_GE(programs, 400);
    EXPECT_GT(successes, programs * 10);
}

TEST(Property, PipelineExprAgreesWithInterpreter) {
    Rng rng(17);
    int programs = 0;
    for (int attempt = 0; attempt < 20000 && programs < 300; ++attempt) {
        auto c = clean_case(rng);
        if (!c) {
            continue;
        }
        ++programs;
        std::string body = compile(c->program, c->source, c->target, "pipeline-expr").body;
        for (int r = 0; r < 10; ++r) {
            Value rec = conform_record(testing::record(rng, c->source), c->source);
            Outcome direct = run([&] { return transform(c->program, rec, c->source, c->target); });
            Outcome piped = run([&] { return run_pipeline_expr(body, rec, c->source, c->target); });
            ASSERT_EQ(direct.value, piped.value) << serialize_program(c->program) << serialize_record(rec);
            ASSERT_EQ(direct.error, piped.error)
                << direct.detail << " | " << piped.detail << "\n" << serialize_program(c->program);
        }
    }
    EXPECT_GE(programs, 300);
}

TEST(Property, PlannerIsDeterministicAndMapsSchemaOntoItself) {
    Rng rng(18);
    for (int i = 0; i < 300; ++i) {
        Schema s = testing::chance(rng, 0.5) ? testing::unit_schema(rng) : testing::schema(rng, 6, 1);
        Schema t = testing::evolve(rng, s);
        ASSERT_EQ(plan_heuristic(s, t), plan_heuristic(s, t));

        StlProgram self = plan_heuristic(s, s);
        ASSERT_EQ(validate_program(self, s, s), std::vector<Diagnostic>{}) << serialize_program(self);
        Value rec = conform_record(testing::record(rng, s), s);
        Value out = transform(self, rec, s, s);
        if (!has_defaults(s.fields)) {
            ASSERT_EQ(out, rec) << serialize_program(self);
        }
    }
}

TEST(Property, UnitConversionsMatchPhysics) {
    const std::vector<std::string> units = {"ms", "s", "min", "m", "cm", "celsius", "fahrenheit", "kpa", "pa"};
    Rng rng(19);
    for (const auto& a : units) {
        for (const auto& b : units) {
            auto conv = infer_unit_conversion(a, b);
            auto expected = oracle::affine(a, b);
            if (!conv) {
                continue;
            }
            ASSERT_TRUE(expected) << a << "->" << b;
            EXPECT_NEAR(conv->factor, expected->first, 1e-9 * std::abs(expected->first)) << a << "->" << b;
            EXPECT_NEAR(conv->offset, expected->second, 1e-9 + 1e-9 * std::abs(expected->second)) << a << "->" << b;
            auto back = infer_unit_conversion(b, a);
            ASSERT_TRUE(back) << b << "->" << a;
            for (int i = 0; i < 100; ++i) {
                double x = std::uniform_real_distribution<double>(-1e4, 1e4)(rng);
                EXPECT_NEAR(back->apply(conv->apply(x)), x, 1e-9 * std::max(1.0, std::abs(x)));
            }
        }
    }
}

TEST(Property, ScoringIsSymmetric) {
    Rng rng(20);
    for (int i = 0; i < kRuns; ++i) {
        Schema s = testing::unit_schema(rng);
        Schema t = testing::evolve(rng, s);
        StlProgram a = testing::noisy_mapping(rng, s, t);
        StlProgram b = testing::noisy_mapping(rng, s, t);
        EvalResult ab = score_program(a, b);
        EvalResult ba = score_program(b, a);
        ASSERT_EQ(ab.tp, ba.tp);
        ASSERT_EQ(ab.fp, ba.fn);
        ASSERT_EQ(ab.fn, ba.fp);
        auto expected = oracle::prf(ab.tp, ab.fp, ab.fn);
        ASSERT_DOUBLE_EQ(ab.f1, expected.f1);
        EvalResult self = score_program(a, a);
        ASSERT_EQ(self.fp, 0u);
        ASSERT_EQ(self.fn, 0u);
        ASSERT_DOUBLE_EQ(self.f1, 1.0);
    }
}

TEST(Property, LevenshteinMatchesTable) {
    Rng rng(21);
    for (int i = 0; i < kRuns; ++i) {
        std::string a = testing::identifier(rng);
        std::string b = testing::chance(rng, 0.3) ? a + testing::identifier(rng) : testing::identifier(rng);
        ASSERT_EQ(levenshtein(a, b), oracle::edit_distance(a, b)) << a << " " << b;
        double sim = name_similarity(a, b);
        ASSERT_GE(sim, 0.0);
        ASSERT_LE(sim, 1.0);
        ASSERT_DOUBLE_EQ(sim, name_similarity(b, a));
    }
}

/// Applies random registry operations, truncates the log at random offsets
/// and checks that a reopened registry equals the state after the last
/// complete line.
TEST(Property, ReplayOfAnyLogPrefix) {
    Rng rng(22);
    std::random_device rd;
    fs::path dir = fs::temp_directory_path() / ("gse-prop-" + std::to_string(rd()));
    fs::create_directories(dir);
    for (int round = 0; round < 20; ++round) {
        fs::path log = dir / ("log-" + std::to_string(round) + ".jsonl");
        std::vector<std::string> states{};
        std::vector<std::uint64_t> ends{};
        auto opts = [&] {
            RegistryOptions o;
            o.store_path = log;
            o.clock = [] { return std::string("2024-01-01T00:00:00Z"); };
            return o;
        };
        {
            Registry r(opts());
            states.push_back(r.state_document().dump());
            ends.push_back(0);
            std::vector<std::uint32_t> ids;
            for (int op = 0; op < 12; ++op) {
                try {
                    switch (testing::pick(rng, 4)) {
                        case 0: {
                            Schema s = testing::unit_schema(rng);
                            ids.push_back(r.register_schema("s" + std::to_string(testing::pick(rng, 2)),
                                                            serialize_schema(s)).id.id);
                            break;
                        }
                        case 1:
                            r.set_config("s" + std::to_string(testing::pick(rng, 2)),
                                         testing::chance(rng, 0.5) ? CompatibilityMode::None
                                                                   : CompatibilityMode::Semantic);
                            break;
                        case 2:
                            if (ids.size() >= 2) {
                                r.create_mapping(testing::pick_from(rng, ids), testing::pick_from(rng, ids),
                                                 Engine::Heuristic);
                            }
                            break;
                        default: {
                            auto all = r.mappings();
                            if (!all.empty()) {
                                const auto& m = testing::pick_from(rng, all);
                                r.decide_mapping(m.source_id, m.target_id,
                                                 testing::chance(rng, 0.5) ? Decision::Approve : Decision::Reject);
                            }
                            break;
                        }
                    }
                } catch (const RegistryError&) {
                }
                if (r.last_sequence() + 1 > states.size()) {
                    states.push_back(r.state_document().dump());
                    ends.push_back(fs::file_size(log));
                }
            }
        }
        std::string full;
        {
            std::ifstream in(log, std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            full = ss.str();
        }
        ASSERT_EQ(ends.back(), full.size());
        for (int cut = 0; cut < 5; ++cut) {
            std::size_t at = testing::pick(rng, full.size() + 1);
            {
                std::ofstream out(log, std::ios::binary | std::ios::trunc);
                out << full.substr(0, at);
            }
            std::size_t complete = 0;
            while (complete + 1 < ends.size() && ends[complete + 1] <= at) {
                ++complete;
            }
            Registry reopened(opts());
            ASSERT_EQ(reopened.last_sequence(), complete) << "cut at " << at;
            ASSERT_EQ(reopened.state_document().dump(), states[complete]) << "cut at " << at;
            ASSERT_EQ(fs::file_size(log), ends[complete]);
        }
    }
    fs::remove_all(dir);
}

}  // namespace
}  // namespace gse
