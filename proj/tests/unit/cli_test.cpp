#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gse/cli.hpp"
#include "printers.hpp"

namespace gse::cli {
namespace {

namespace fs = std::filesystem;

std::string fixture(const std::string& rel) { return std::string(GSE_FIXTURE_DIR) + "/" + rel; }

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    int code = dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        std::random_device rd;
        dir_ = fs::temp_directory_path() / ("gse-cli-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(dir_);
        for (const char* name : {"GSE_CONFIG", "GSE_STORE_PATH", "GSE_LISTEN_ADDR", "GSE_MODEL_URL",
                                 "GSE_MODEL_KEY", "GSE_MODEL_NAME"}) {
            ::unsetenv(name);
        }
    }
    void TearDown() override {
        ::unsetenv("GSE_STORE_PATH");
        ::unsetenv("GSE_CONFIG");
        fs::remove_all(dir_);
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(dir_ / name, std::ios::binary) << text;
        return path(name);
    }

    fs::path dir_;
};

TEST_F(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"bogus"}).code, 2);
    EXPECT_EQ(run({"map", "validate", "--source", "x"}).code, 2);
    auto r = run({"schema", "list"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("no store configured"), std::string::npos) << r.err;
    EXPECT_EQ(run({"map", "generate", "--source", fixture("motion/v2.schema.yaml"), "--target",
                   fixture("motion/v1.schema.yaml"), "--engine", "oracle"})
                  .code,
              2);
}

TEST_F(Cli, HelpExitsZero) {
    auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("schema"), std::string::npos);
}

TEST_F(Cli, SchemaRegisterGetList) {
    std::string store = path("store.jsonl");
    auto r1 = run({"--store", store, "schema", "register", fixture("motion/v1.schema.yaml")});
    ASSERT_EQ(r1.code, 0) << r1.err;
    EXPECT_EQ(r1.out, "{\"id\":1,\"version\":1}\n");
    auto r2 = run({"--store", store, "schema", "register", fixture("motion/v2.schema.yaml")});
    ASSERT_EQ(r2.code, 0) << r2.err;
    EXPECT_EQ(r2.out, "{\"id\":2,\"version\":2}\n");

    auto list = run({"--store", store, "schema", "list"});
    EXPECT_EQ(list.out, "motion: v1=1 v2=2\n");

    auto get = run({"--store", store, "schema", "get", "--id", "2"});
    ASSERT_EQ(get.code, 0);
    EXPECT_EQ(get.out.rfind("# id 2\n", 0), 0u);
    EXPECT_NE(get.out.find("duration_ms"), std::string::npos);
    auto latest = run({"--store", store, "schema", "get", "--subject", "motion"});
    EXPECT_EQ(latest.out, get.out);

    auto missing = run({"--store", store, "schema", "get", "--id", "9"});
    EXPECT_EQ(missing.code, 1);
    EXPECT_EQ(run({"--store", store, "schema", "get"}).code, 2);
}

TEST_F(Cli, StoreFromEnvironmentAndConfigFile) {
    std::string env_store = path("env.jsonl");
    std::string file_store = path("file.jsonl");
    std::string config = write("gse.yaml", "store: " + file_store + "\n");

    ::setenv("GSE_CONFIG", config.c_str(), 1);
    ASSERT_EQ(run({"schema", "register", fixture("motion/v1.schema.yaml")}).code, 0);
    EXPECT_TRUE(fs::exists(file_store));

    ::setenv("GSE_STORE_PATH", env_store.c_str(), 1);
    ASSERT_EQ(run({"schema", "register", fixture("motion/v1.schema.yaml")}).code, 0);
    EXPECT_TRUE(fs::exists(env_store));

    std::string flag_store = path("flag.jsonl");
    ASSERT_EQ(run({"--store", flag_store, "schema", "register", fixture("motion/v1.schema.yaml")}).code, 0);
    EXPECT_TRUE(fs::exists(flag_store));
}

TEST_F(Cli, ConfigFileLayering) {
    std::string config = write("c.yaml", "store: a.jsonl\nengine: manual\nbackend: sql-view\n");
    CliConfig c = load_config_file(config);
    EXPECT_EQ(c.store_path, "a.jsonl");
    EXPECT_EQ(c.engine, "manual");
    EXPECT_EQ(c.backend, "sql-view");
    EXPECT_EQ(c.listen_addr, "127.0.0.1:8081");
    ::setenv("GSE_STORE_PATH", "b.jsonl", 1);
    EXPECT_EQ(apply_environment(c).store_path, "b.jsonl");
    EXPECT_THROW(load_config_file(write("bad.yaml", "colour: red\n")), std::exception);
}

TEST_F(Cli, MapGenerateAndValidate) {
    auto gen = run({"map", "generate", "--source", fixture("session/source.schema.yaml"), "--target",
                    fixture("session/target.schema.yaml")});
    ASSERT_EQ(gen.code, 0) << gen.err;
    EXPECT_NE(gen.out.find("same_entity: true"), std::string::npos) << gen.out;
    std::string mapping = write("m.stl.yaml", gen.out);
    auto val = run({"map", "validate", "--source", fixture("session/source.schema.yaml"), "--target",
                    fixture("session/target.schema.yaml"), "--mapping", mapping});
    EXPECT_EQ(val.code, 0);
    EXPECT_EQ(val.out, "valid\n");

    auto wrong = run({"map", "validate", "--source", fixture("motion/v2.schema.yaml"), "--target",
                      fixture("motion/v1.schema.yaml"), "--mapping", fixture("session/v2_to_v1.stl.yaml")});
    EXPECT_EQ(wrong.code, 1);
    EXPECT_EQ(wrong.out.rfind("invalid: ", 0), 0u);
    EXPECT_NE(wrong.err.find("[unknown-source-path]"), std::string::npos) << wrong.err;
}

TEST_F(Cli, MapGenerateFromTranscript) {
    auto r = run({"map", "generate", "--engine", "model", "--transcript", fixture("transcripts/rename_repair.json"),
                  "--source", fixture("rename/source.schema.yaml"), "--target", fixture("rename/target.schema.yaml")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("repair rounds used: 1"), std::string::npos) << r.err;
}

TEST_F(Cli, MapShowListsCommands) {
    auto r = run({"map", "show", "--mapping", fixture("session/v2_to_v1.stl.yaml")});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("MATCH true (same session summary)\n1. ", 0), 0u) << r.out;
    EXPECT_NE(r.out.find("\n7. "), std::string::npos);
}

TEST_F(Cli, CompileSqlViewMatchesGolden) {
    auto r = run({"compile", "--backend", "sql-view", "--mapping", fixture("session/v2_to_v1.stl.yaml"), "--source",
                  fixture("session/source.schema.yaml"), "--target", fixture("session/target.schema.yaml")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, slurp(fixture("session/v2_to_v1.sql")));
    auto bad = run({"compile", "--backend", "cobol", "--mapping", fixture("session/v2_to_v1.stl.yaml"), "--source",
                    fixture("session/source.schema.yaml"), "--target", fixture("session/target.schema.yaml")});
    EXPECT_EQ(bad.code, 1);
}

TEST_F(Cli, ApplyTransformsLines) {
    std::string records = write("in.jsonl", "{\"session_id\":\"a\",\"duration_ms\":2500,\"state\":\"open\"}\n"
                                            "\n"
                                            "{\"session_id\":\"b\"}\n"
                                            "not json\n");
    auto r = run({"apply", "--mapping", fixture("session/v2_to_v1.stl.yaml"), "--source",
                  fixture("session/source.schema.yaml"), "--target", fixture("session/target.schema.yaml"),
                  "--records", records});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.out, "{\"session_id\":\"a\",\"duration_s\":2.5,\"state\":\"active\",\"retries\":0}\n");
    EXPECT_NE(r.err.find("line 3: [parse]"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("line 4: [parse]"), std::string::npos) << r.err;
}

TEST_F(Cli, MappingLifecycleThroughStore) {
    std::string store = path("s.jsonl");
    ASSERT_EQ(run({"--store", store, "schema", "register", fixture("session/source.schema.yaml")}).code, 0);
    ASSERT_EQ(run({"--store", store, "schema", "register", "--subject", "session-old",
                   fixture("session/target.schema.yaml")})
                  .code,
              0);
    auto created = run({"--store", store, "mapping", "create", "--source-id", "1", "--target-id", "2"});
    ASSERT_EQ(created.code, 0) << created.err;
    EXPECT_NE(created.out.find("pending"), std::string::npos) << created.out;
    // The planner finds no variant correspondences for `state`, so the
    // mapping carries a MISSING and cannot be approved.
    auto refused = run({"--store", store, "mapping", "approve", "--source-id", "1", "--target-id", "2"});
    EXPECT_EQ(refused.code, 1);
    EXPECT_NE(refused.err.find("MISSING"), std::string::npos) << refused.err;
    auto rejected = run({"--store", store, "mapping", "reject", "--source-id", "1", "--target-id", "2"});
    EXPECT_EQ(rejected.out, "mapping 1 -> 2: rejected\n") << rejected.err;

    auto manual = run({"--store", store, "mapping", "create", "--source-id", "1", "--target-id", "2", "--engine",
                       "manual", "--mapping", fixture("session/v2_to_v1.stl.yaml")});
    ASSERT_EQ(manual.code, 0) << manual.err;
    auto approved = run({"--store", store, "mapping", "approve", "--source-id", "1", "--target-id", "2"});
    EXPECT_EQ(approved.out, "mapping 1 -> 2: approved\n") << approved.err;
    auto sql = run({"--store", store, "compile", "--backend", "sql-view", "--source-id", "1", "--target-id", "2"});
    EXPECT_EQ(sql.code, 0) << sql.err;
    EXPECT_NE(sql.out.find("SELECT"), std::string::npos);
    EXPECT_EQ(run({"--store", store, "mapping", "approve", "--source-id", "1"}).code, 2);
}

TEST_F(Cli, CompatCheck) {
    auto ok = run({"compat", "check", "--old", fixture("motion/v1.schema.yaml"), "--new",
                   fixture("motion/v1.schema.yaml"), "--mode", "FULL"});
    EXPECT_EQ(ok.code, 0);
    EXPECT_EQ(ok.out, "compatible (FULL)\n");
    auto bad = run({"compat", "check", "--old", fixture("motion/v1.schema.yaml"), "--new",
                    fixture("motion/v2.schema.yaml"), "--mode", "BACKWARD"});
    EXPECT_EQ(bad.code, 1);
    EXPECT_EQ(bad.out, "incompatible (BACKWARD)\n");
    EXPECT_EQ(run({"compat", "check", "--old", fixture("motion/v1.schema.yaml"), "--new",
                   fixture("motion/v2.schema.yaml"), "--mode", "SIDEWAYS"})
                  .code,
              2);
}

TEST_F(Cli, EvalPrintsReport) {
    auto r = run({"eval", "--corpus", fixture("iot")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("case", 0), 0u);
    EXPECT_NE(r.out.find("hue_to_vivint"), std::string::npos);
    EXPECT_NE(r.out.find("macro"), std::string::npos);
}

}  // namespace
}  // namespace gse::cli
