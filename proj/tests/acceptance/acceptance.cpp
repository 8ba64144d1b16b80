// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any
// failure.

#include <httplib.h>
#include <netinet/in.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "generators.hpp"
#include "gse/assembler.hpp"
#include "gse/error.hpp"
#include "gse/eval.hpp"
#include "gse/framing.hpp"
#include "gse/interpreter.hpp"
#include "gse/planner.hpp"
#include "gse/registry.hpp"
#include "gse/validate.hpp"
#include "oracles.hpp"

extern char** environ;

namespace {

using namespace gse;
using testing::Rng;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

/// Collects failed checks for one criterion.
struct Check {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            failures.push_back(what);
        }
    }
};

std::string fixture_path(const std::string& rel) { return std::string(GSE_FIXTURE_DIR) + "/" + rel; }

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

// ---- 1 -------------------------------------------------------------------

void f1_rows(Check& c) {
    struct Row {
        double precision, recall, f1;
    };
    const std::vector<Row> rows = {{0.91, 0.98, 0.94}, {0.73, 0.83, 0.78}, {1.0, 0.8, 0.89},
                                   {0.2, 0.2, 0.2},    {1.0, 0.9, 0.95},   {0.8, 0.67, 0.72}};
    for (const auto& r : rows) {
        double got = f1_score(r.precision, r.recall);
        c.expect(std::abs(got - r.f1) <= 0.01, "f1(" + fmt(r.precision) + ", " + fmt(r.recall) + ") = " + fmt(got) +
                                                  ", expected " + fmt(r.f1));
        c.expect(std::abs(got - oracle::f1(r.precision, r.recall)) < 1e-12, "f1 differs from reference formula");
    }
}

// ---- 2 -------------------------------------------------------------------

void heuristic_corpus(Check& c) {
    auto start = Clock::now();
    auto cases = load_corpus(fixture_path("iot"));
    auto report = evaluate_corpus(cases, PlannerConfig{});
    double elapsed = seconds_since(start);
    c.expect(cases.size() == 3, "corpus has " + std::to_string(cases.size()) + " cases");
    c.expect(report.macro_f1 >= 0.90, "macro-F1 " + fmt(report.macro_f1) + " < 0.90");
    c.expect(elapsed < 1.0, "took " + fmt(elapsed) + " s");
    double sum = 0;
    for (const auto& s : report.cases) {
        c.expect(!s.error, s.name + ": " + s.error.value_or(""));
        sum += s.result.f1;
    }
    c.expect(std::abs(sum / 3.0 - report.macro_f1) < 1e-12, "macro-F1 is not the mean of case scores");
}

// ---- 3 -------------------------------------------------------------------

Schema one_field(const std::string& name, const std::string& type) {
    return parse_schema("subject: t\nversion: 1\nfields:\n  - {name: " + name + ", type: " + type + "}\n");
}

StlProgram prog(const std::string& commands, bool same = true) {
    return parse_program(std::string("source: {subject: t, version: 1}\ntarget: {subject: t, version: 1}\n") +
                         "match: {same_entity: " + (same ? "true" : "false") + "}\ncommands:\n" + commands);
}

std::optional<TransformErrorKind> failure(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const TransformError& e) {
        return e.kind();
    }
    return std::nullopt;
}

void interpreter_examples(Check& c) {
    {
        Schema s = one_field("duration_ms", "integer");
        Schema t = one_field("duration_s", "float");
        StlProgram p = prog("  - rename: {source: duration_ms, target: duration_s}\n"
                            "  - scale: {target: duration_s, factor: 0.001}\n");
        c.expect(transform(p, Value{Object{{"duration_ms", 1500}}}, s, t) == Value{Object{{"duration_s", 1.5}}},
                 "1500 ms -> 1.5 s");
    }
    {
        Schema s = one_field("temp_c", "integer");
        Schema t = one_field("temp_f", "float");
        StlProgram gen = prog("  - gen: {name: c_to_f, expr: value * 1.8 + 32}\n"
                              "  - apply: {source: temp_c, target: temp_f, fn: c_to_f}\n");
        StlProgram affine = prog("  - copy: {source: temp_c, target: temp_f}\n"
                                 "  - scale: {target: temp_f, factor: 1.8}\n  - shift: {target: temp_f, offset: 32}\n");
        Value want{Object{{"temp_f", 68.0}}};
        c.expect(transform(gen, Value{Object{{"temp_c", 20}}}, s, t) == want, "20 C -> 68.0 F via GEN/APPLY");
        c.expect(transform(affine, Value{Object{{"temp_c", 20}}}, s, t) == want, "20 C -> 68.0 F via SCALE/SHIFT");
    }
    {
        Schema s = one_field("x", "integer");
        Value rec{Object{{"x", 5}}};
        StlProgram a = prog("  - copy: {source: x, target: x}\n  - scale: {target: x, factor: 2}\n"
                            "  - shift: {target: x, offset: 3}\n");
        StlProgram b = prog("  - copy: {source: x, target: x}\n  - shift: {target: x, offset: 3}\n"
                            "  - scale: {target: x, factor: 2}\n");
        c.expect(transform(a, rec, s, s) == Value{Object{{"x", 13}}}, "scale then shift: 5 -> 13");
        c.expect(transform(b, rec, s, s) == Value{Object{{"x", 16}}}, "shift then scale: 5 -> 16");
    }
    {
        Schema s = one_field("x", "integer");
        auto kind = failure([&] { transform(prog("  []\n", false), Value{Object{{"x", 1}}}, s, s); });
        c.expect(kind == TransformErrorKind::Abort, "MATCH false -> Abort");
        Schema t = one_field("y", "integer");
        std::optional<std::string> path;
        try {
            transform(prog("  - delete: {source: x}\n  - missing: {target: y}\n"), Value{Object{{"x", 1}}}, s, t);
        } catch (const TransformError& e) {
            kind = e.kind();
            path = e.path();
        }
        c.expect(kind == TransformErrorKind::MappingFailure && path == "y", "MISSING -> MappingFailure naming y");
    }

    auto T = [](TypeKind k) { return FieldType::scalar(k); };
    FieldType en = FieldType::enumeration({"a", "b"});
    struct Ok {
        Value in;
        FieldType to;
        Value out;
        std::string what;
    };
    const std::vector<Ok> ok = {
        {Value{1500}, T(TypeKind::Float), Value{1500.0}, "int->float"},
        {Value{-7}, T(TypeKind::Integer), Value{-7}, "int->int"},
        {Value{3.0}, T(TypeKind::Integer), Value{3}, "float 3.0->int"},
        {Value{-2.0000000000001}, T(TypeKind::Integer), Value{-2}, "float within 1e-9->int"},
        {Value{2.5}, T(TypeKind::Float), Value{2.5}, "float->float"},
        {Value{1500}, T(TypeKind::String), Value{"1500"}, "int->string"},
        {Value{0.1}, T(TypeKind::String), Value{"0.1"}, "float->string shortest"},
        {Value{1.5}, T(TypeKind::String), Value{"1.5"}, "float->string"},
        {Value{" 42 "}, T(TypeKind::Integer), Value{42}, "string->int trimmed"},
        {Value{"-1.25"}, T(TypeKind::Float), Value{-1.25}, "string->float"},
        {Value{"abc"}, T(TypeKind::String), Value{"abc"}, "string->string"},
        {Value{true}, T(TypeKind::String), Value{"true"}, "bool->string true"},
        {Value{false}, T(TypeKind::String), Value{"false"}, "bool->string false"},
        {Value{"true"}, T(TypeKind::Boolean), Value{true}, "string true->bool"},
        {Value{"FALSE"}, T(TypeKind::Boolean), Value{false}, "string FALSE->bool"},
        {Value{"1"}, T(TypeKind::Boolean), Value{true}, "string 1->bool"},
        {Value{"0"}, T(TypeKind::Boolean), Value{false}, "string 0->bool"},
        {Value{false}, T(TypeKind::Boolean), Value{false}, "bool->bool"},
        {Value{"b"}, en, Value{EnumSymbol{"b"}}, "string->enum"},
        {Value{EnumSymbol{"a"}}, en, Value{EnumSymbol{"a"}}, "enum->enum"},
    };
    for (const auto& k : ok) {
        try {
            Value got = cast_value(k.in, k.to);
            c.expect(got == k.out, "cast " + k.what + " gave " + to_display(got));
        } catch (const std::exception& e) {
            c.expect(false, "cast " + k.what + " threw " + e.what());
        }
    }
    struct Bad {
        Value in;
        FieldType to;
        std::string what;
    };
    const std::vector<Bad> bad = {
        {Value{1.5}, T(TypeKind::Integer), "float with fraction->int"},
        {Value{1e30}, T(TypeKind::Integer), "float out of range->int"},
        {Value{"4x"}, T(TypeKind::Integer), "non-numeric string->int"},
        {Value{"abc"}, T(TypeKind::Float), "non-numeric string->float"},
        {Value{"yes"}, T(TypeKind::Boolean), "string yes->bool"},
        {Value{"c"}, en, "undeclared string->enum"},
        {Value{1}, T(TypeKind::Boolean), "int->bool"},
        {Value{1.0}, T(TypeKind::Boolean), "float->bool"},
        {Value{true}, T(TypeKind::Integer), "bool->int"},
        {Value{true}, T(TypeKind::Float), "bool->float"},
        {Value{1}, en, "int->enum"},
        {Value{1.0}, en, "float->enum"},
        {Value{true}, en, "bool->enum"},
        {Value{EnumSymbol{"a"}}, T(TypeKind::Integer), "enum->int"},
        {Value{EnumSymbol{"a"}}, T(TypeKind::Boolean), "enum->bool"},
    };
    for (const auto& k : bad) {
        auto kind = failure([&] { cast_value(k.in, k.to); });
        c.expect(kind == TransformErrorKind::CastError, "cast " + k.what + " should be CastError");
    }
}

// ---- 4 -------------------------------------------------------------------

struct FixtureProgram {
    std::string name;
    Schema source;
    Schema target;
    StlProgram program;
};

std::vector<FixtureProgram> fixture_programs() {
    auto load = [](const std::string& name, const std::string& s, const std::string& t, const std::string& p) {
        return FixtureProgram{name, parse_schema(slurp(fixture_path(s))), parse_schema(slurp(fixture_path(t))),
                              parse_program(slurp(fixture_path(p)))};
    };
    std::vector<FixtureProgram> out = {
        load("motion", "motion/v2.schema.yaml", "motion/v1.schema.yaml", "motion/v2_to_v1.stl.yaml"),
        load("session", "session/source.schema.yaml", "session/target.schema.yaml", "session/v2_to_v1.stl.yaml"),
        load("edge", "edge/source.schema.yaml", "edge/target.schema.yaml", "edge/v3_to_v2.stl.yaml"),
    };
    for (auto& g : load_corpus(fixture_path("iot"))) {
        out.push_back({"iot/" + g.name, std::move(g.source), std::move(g.target), std::move(g.gold)});
    }
    return out;
}

struct Outcome {
    std::optional<Value> value;
    std::optional<TransformErrorKind> error;
};

Outcome outcome(const std::function<Value()>& fn) {
    Outcome o;
    try {
        o.value = fn();
    } catch (const TransformError& e) {
        o.error = e.kind();
    }
    return o;
}

void backend_equivalence(Check& c) {
    auto start = Clock::now();
    Rng rng(404);
    std::size_t compared = 0;
    std::size_t failures = 0;
    for (const auto& f : fixture_programs()) {
        std::string body = compile(f.program, f.source, f.target, "pipeline-expr").body;
        for (int i = 0; i < 100; ++i) {
            Value rec = conform_record(testing::record(rng, f.source), f.source);
            Outcome a = outcome([&] { return transform(f.program, rec, f.source, f.target); });
            Outcome b = outcome([&] { return run_pipeline_expr(body, rec, f.source, f.target); });
            ++compared;
            if (a.value != b.value || a.error != b.error) {
                c.expect(false, f.name + " differs on " + serialize_record(rec));
            }
            failures += a.error ? 1 : 0;
        }
    }
    double elapsed = seconds_since(start);
    c.expect(compared == 600, "compared " + std::to_string(compared) + " records");
    c.expect(elapsed < 5.0, "took " + fmt(elapsed) + " s");
    (void)failures;
}

// ---- 5 -------------------------------------------------------------------

void roundtrips(Check& c) {
    Rng rng(505);
    int schemas = 0;
    for (int i = 0; i < 1000; ++i) {
        Schema s = testing::schema(rng);
        if (parse_schema(serialize_schema(s)) == s) {
            ++schemas;
        } else {
            c.expect(false, "schema roundtrip: " + serialize_schema(s));
        }
    }
    int programs = 0;
    for (int i = 0; i < 1000; ++i) {
        StlProgram p = testing::program(rng);
        if (parse_program(serialize_program(p)) == p) {
            ++programs;
        } else {
            c.expect(false, "STL roundtrip: " + serialize_program(p));
        }
    }
    int portable = 0;
    for (int attempt = 0; attempt < 100000 && portable < 1000; ++attempt) {
        Schema s = testing::chance(rng, 0.5) ? testing::unit_schema(rng) : testing::schema(rng, 6, 1);
        Schema t = testing::evolve(rng, s);
        StlProgram p = testing::candidate_mapping(rng, s, t);
        if (!validate_program(p, s, t).empty()) {
            continue;
        }
        if (parse_program(compile(p, s, t, "portable").body) == p) {
            ++portable;
        } else {
            c.expect(false, "portable re-parse: " + serialize_program(p));
            ++portable;
        }
    }
    c.expect(schemas == 1000, std::to_string(schemas) + " schema roundtrips");
    c.expect(programs == 1000, std::to_string(programs) + " STL roundtrips");
    c.expect(portable >= 1000, std::to_string(portable) + " portable roundtrips");
}

// ---- 6 -------------------------------------------------------------------

void validator_soundness(Check& c) {
    Rng rng(606);
    int programs = 0;
    int runs = 0;
    for (int attempt = 0; attempt < 100000 && programs < 1000; ++attempt) {
        Schema s = testing::chance(rng, 0.5) ? testing::unit_schema(rng) : testing::schema(rng, 6, 1);
        Schema t = testing::evolve(rng, s);
        StlProgram p = testing::candidate_mapping(rng, s, t);
        bool missing = false;
        for (const auto& cmd : p.commands) {
            missing = missing || std::holds_alternative<cmd::Missing>(cmd);
        }
        if (missing || p.aborts() || !validate_program(p, s, t).empty()) {
            continue;
        }
        ++programs;
        for (int r = 0; r < 20; ++r) {
            Value rec = conform_record(testing::record(rng, s), s);
            ++runs;
            try {
                Value out = transform(p, rec, s, t);
                if (!(conform_record(out, t) == out)) {
                    c.expect(false, "output does not conform:\n" + serialize_program(p));
                }
            } catch (const TransformError& e) {
                std::string what = e.what();
                if (e.kind() == TransformErrorKind::PathError || what.find("does not conform") != std::string::npos) {
                    c.expect(false, what + "\n" + serialize_program(p) + serialize_record(rec));
                }
            }
        }
    }
    c.expect(programs >= 1000, std::to_string(programs) + " clean programs");
    (void)runs;
}

// ---- 7 -------------------------------------------------------------------

int free_port() {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    int port = ntohs(addr.sin_port);
    ::close(fd);
    return port;
}

/// A `gse serve` child process.
class Server {
public:
    Server(const fs::path& store, int port) : port_(port) {
        std::vector<std::string> args = {GSE_CLI_PATH, "--store", store.string(), "serve",
                                         "--listen", "127.0.0.1:" + std::to_string(port)};
        std::vector<char*> argv;
        for (auto& a : args) {
            argv.push_back(a.data());
        }
        argv.push_back(nullptr);
        if (::posix_spawn(&pid_, GSE_CLI_PATH, nullptr, nullptr, argv.data(), environ) != 0) {
            throw std::runtime_error("cannot spawn " + std::string(GSE_CLI_PATH));
        }
        httplib::Client client("127.0.0.1", port_);
        for (int i = 0; i < 200; ++i) {
            if (auto res = client.Get("/subjects")) {
                return;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
        kill();
        throw std::runtime_error("server did not come up");
    }
    ~Server() { kill(); }

    void kill() {
        if (pid_ > 0) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, nullptr, 0);
            pid_ = -1;
        }
    }

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(5, 0);
        return c;
    }

private:
    pid_t pid_ = -1;
    int port_;
};

Document json_body(const httplib::Result& res, int status, Check& c, const std::string& what) {
    if (!res) {
        c.expect(false, what + ": no response");
        return {};
    }
    c.expect(res->status == status, what + ": status " + std::to_string(res->status) + " " + res->body);
    try {
        return Document::parse(res->body);
    } catch (const std::exception&) {
        return {};
    }
}

/// Everything a client can observe about the registry state.
std::string observed_state(httplib::Client& client, Check& c) {
    Document state = Document::object();
    Document subjects = json_body(client.Get("/subjects"), 200, c, "GET /subjects");
    state["subjects"] = subjects;
    for (const auto& s : subjects) {
        std::string subject = s.get<std::string>();
        Document versions = json_body(client.Get("/subjects/" + subject + "/versions"), 200, c, "GET versions");
        for (const auto& v : versions) {
            state["schemas"][subject][std::to_string(v.get<std::int64_t>())] =
                json_body(client.Get("/subjects/" + subject + "/versions/" + std::to_string(v.get<std::int64_t>())),
                          200, c, "GET version");
        }
        state["config"][subject] = json_body(client.Get("/config/" + subject), 200, c, "GET config");
    }
    auto mapping = client.Get("/mappings/2/1");
    state["mapping"] = mapping && mapping->status == 200 ? Document::parse(mapping->body) : Document();
    return state.dump();
}

void registry_end_to_end(Check& c) {
    auto start = Clock::now();
    std::random_device rd;
    fs::path dir = fs::temp_directory_path() / ("gse-accept-" + std::to_string(rd()));
    fs::create_directories(dir);
    fs::path store = dir / "store.jsonl";
    const std::string v1 = slurp(fixture_path("motion/v1.schema.yaml"));
    const std::string v2 = slurp(fixture_path("motion/v2.schema.yaml"));
    const std::string record =
        R"({"sensor_id":"s-9","motion":true,"status":"active","battery_pct":71,"temperature_f":68.0,"duration_ms":1500,"timestamp":1700000000000})";

    std::string before_kill;
    {
        Server server(store, free_port());
        auto client = server.client();
        Document r1 = json_body(client.Post("/subjects/motion/versions", v1, "application/yaml"), 200, c, "register v1");
        Document r2 = json_body(client.Post("/subjects/motion/versions", v2, "application/yaml"), 200, c, "register v2");
        c.expect(r1 == Document{{"id", 1}, {"version", 1}}, "v1 registered as " + r1.dump());
        c.expect(r2 == Document{{"id", 2}, {"version", 2}}, "v2 registered as " + r2.dump());
        Document again = json_body(client.Post("/subjects/motion/versions", v1, "application/yaml"), 200, c,
                                   "re-register v1");
        c.expect(again == r1, "re-registration returned " + again.dump());
        Document created = json_body(
            client.Post("/mappings", R"({"source_id":2,"target_id":1,"engine":"heuristic"})", "application/json"),
            201, c, "create mapping");
        c.expect(created.value("status", "") == "pending", "new mapping is " + created.value("status", ""));
        before_kill = observed_state(client, c);
        // Mid-corpus: the service dies with a half-written event on disk.
        server.kill();
    }
    std::size_t lines_before = 0;
    {
        std::string text = slurp(store);
        lines_before = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
        std::ofstream(store, std::ios::app | std::ios::binary) << R"({"seq":99,"event":"mapping_dec)";
    }
    c.expect(lines_before == 3, std::to_string(lines_before) + " events logged before the kill");
    {
        Server server(store, free_port());
        auto client = server.client();
        c.expect(observed_state(client, c) == before_kill, "state after restart differs from state before kill");
        Document again = json_body(client.Post("/subjects/motion/versions", v2, "application/yaml"), 200, c,
                                   "re-register v2 after restart");
        c.expect(again == Document{{"id", 2}, {"version", 2}}, "re-registration after restart gave " + again.dump());
        Document approved = json_body(client.Post("/mappings/2/1/decision", R"({"decision":"approve"})",
                                                  "application/json"),
                                      200, c, "approve");
        c.expect(approved.value("status", "") == "approved", "mapping is " + approved.value("status", ""));

        httplib::Headers headers = {{"X-Consumer-Schema-Id", "1"}};
        auto res = client.Post("/transform", headers, encode_frame(2, record), "application/octet-stream");
        if (!res || res->status != 200) {
            c.expect(false, "transform failed: " + (res ? res->body : std::string("no response")));
        } else {
            FramedMessage out = decode_frame(res->body);
            Schema s2 = parse_schema(v2);
            Schema s1 = parse_schema(v1);
            StlProgram program = program_from_document(approved.at("program"));
            Value direct = transform(program, parse_record(record, s2), s2, s1);
            c.expect(out.schema_id == 1, "framed reply has id " + std::to_string(out.schema_id));
            c.expect(out.payload == serialize_record(direct), "framed payload " + out.payload + " != " +
                                                                  serialize_record(direct));
            c.expect(plan_heuristic(s2, s1) == program, "stored program is not the heuristic plan");
        }
        std::string final_state = observed_state(client, c);
        server.kill();

        // A second restart replays the whole log.
        Server third(store, free_port());
        auto third_client = third.client();
        c.expect(observed_state(third_client, c) == final_state, "second restart changed the state");
        third.kill();
    }
    std::string text = slurp(store);
    c.expect(std::count(text.begin(), text.end(), '\n') == 4, "log should hold 4 events after the run");
    c.expect(text.find("mapping_dec\n") == std::string::npos && text.back() == '\n', "torn tail was not dropped");
    {
        RegistryOptions opts;
        opts.store_path = store;
        Registry replayed(opts);
        c.expect(replayed.last_sequence() == 4, "replay saw " + std::to_string(replayed.last_sequence()) + " events");
        c.expect(replayed.get_mapping(2, 1).status == MappingStatus::Approved, "replayed mapping is not approved");
    }
    double elapsed = seconds_since(start);
    c.expect(elapsed < 10.0, "took " + fmt(elapsed) + " s");
    fs::remove_all(dir);
}

// ---- 8 -------------------------------------------------------------------

void golden_frame(Check& c) {
    const std::string golden = slurp(fixture_path("frames/id7.bin"));
    const std::string payload = R"({"sensor_id":"s-1","movement":true})";
    c.expect(golden == oracle::frame(7, payload), "golden file differs from the byte layout");
    c.expect(encode_frame(7, payload) == golden, "encode_frame differs from the golden bytes");
    c.expect(encode_frame(FramedMessage{7, payload}) == golden, "encode_frame(message) differs");
    FramedMessage m = decode_frame(golden);
    c.expect(m.schema_id == 7 && m.payload == payload, "decode_frame misread the golden frame");
    c.expect(frame_schema_id(golden) == 7, "frame_schema_id misread the golden frame");
    const unsigned char expected_header[] = {0x01, 0x00, 0x00, 0x00, 0x07};
    for (std::size_t i = 0; i < 5; ++i) {
        c.expect(static_cast<unsigned char>(golden[i]) == expected_header[i], "header byte " + std::to_string(i));
    }
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        void (*run)(Check&);
    };
    const Criterion criteria[] = {
        {"1 f1-arithmetic", f1_rows},
        {"2 heuristic-corpus-macro-f1", heuristic_corpus},
        {"3 interpreter-semantics", interpreter_examples},
        {"4 backend-equivalence", backend_equivalence},
        {"5 roundtrip-identities", roundtrips},
        {"6 validator-soundness", validator_soundness},
        {"7 registry-end-to-end", registry_end_to_end},
        {"8 golden-frame", golden_frame},
    };
    int failed = 0;
    for (const auto& criterion : criteria) {
        Check check;
        auto start = Clock::now();
        try {
            criterion.run(check);
        } catch (const std::exception& e) {
            check.failures.push_back(std::string("exception: ") + e.what());
        }
        double elapsed = seconds_since(start);
        bool ok = check.failures.empty();
        failed += ok ? 0 : 1;
        std::cout << (ok ? "PASS " : "FAIL ") << criterion.name << " (" << fmt(elapsed) << " s)\n";
        for (std::size_t i = 0; i < check.failures.size() && i < 5; ++i) {
            std::cout << "  " << check.failures[i] << '\n';
        }
        std::cout.flush();
    }
    return failed == 0 ? 0 : 1;
}
