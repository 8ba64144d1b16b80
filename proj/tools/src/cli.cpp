#include "gse/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "gse/assembler.hpp"
#include "gse/eval.hpp"
#include "gse/http_service.hpp"
#include "gse/interpreter.hpp"
#include "gse/planner.hpp"
#include "gse/registry.hpp"
#include "gse/validate.hpp"

namespace gse::cli {

namespace {

/// Usage problems detected after parsing; exit status 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    if (path == "-") {
        std::stringstream buffer;
        buffer << std::cin.rdbuf();
        return buffer.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void set_string(const Document& doc, const char* key, std::string& field) {
    if (!doc.contains(key)) {
        return;
    }
    if (!doc.at(key).is_string()) {
        throw ParseError(std::string("config: '") + key + "' must be a string");
    }
    field = doc.at(key).get<std::string>();
}

void set_env(const char* name, std::string& field) {
    const char* v = std::getenv(name);
    if (v != nullptr && *v != '\0') {
        field = v;
    }
}

Engine engine_of(const std::string& name) {
    auto engine = parse_engine(name);
    if (!engine) {
        throw UsageError("unknown engine '" + name + "' (expected model, heuristic or manual)");
    }
    return *engine;
}

void print_diagnostics(const std::vector<Diagnostic>& diagnostics, std::ostream& err) {
    for (const auto& d : diagnostics) {
        err << format_diagnostic(d) << '\n';
    }
}

struct Options {
    std::string config_file;
    std::string store;
    std::string listen;
    std::string engine;
    std::string backend;

    std::string subject;
    std::string version;
    std::uint32_t id = 0;
    std::string file;
    std::string old_file;
    std::string new_file;
    std::string mode;
    std::string source;
    std::string target;
    std::string mapping;
    std::string records;
    std::string output;
    std::string transcript;
    std::string corpus;
    std::uint32_t source_id = 0;
    std::uint32_t target_id = 0;
    bool prefer_gen = false;
    double threshold = 0.55;
    int repair_rounds = 2;
};

class Runner {
public:
    Runner(const Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {}

    void resolve_config() {
        if (!o_.config_file.empty()) {
            config_ = apply_environment(load_config_file(o_.config_file));
        } else {
            config_ = default_config();
        }
        if (!o_.store.empty()) config_.store_path = o_.store;
        if (!o_.listen.empty()) config_.listen_addr = o_.listen;
        if (!o_.engine.empty()) config_.engine = o_.engine;
        if (!o_.backend.empty()) config_.backend = o_.backend;
    }

    PlannerConfig planner_config() const {
        PlannerConfig c;
        c.engine = engine_of(config_.engine);
        c.prefer_gen = o_.prefer_gen;
        c.similarity_threshold = o_.threshold;
        c.repair_rounds = o_.repair_rounds;
        try {
            c.check();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return c;
    }

    std::unique_ptr<ModelClient> model_client() const {
        if (!o_.transcript.empty()) {
            return std::make_unique<ScriptedModelClient>(ScriptedModelClient::from_file(o_.transcript));
        }
        if (config_.model_url.empty()) {
            throw TransportError("no model endpoint configured (set GSE_MODEL_URL or model_url)");
        }
        return std::make_unique<HttpModelClient>(config_.model_url, config_.model_key, config_.model_name);
    }

    std::unique_ptr<Registry> registry() const {
        if (config_.store_path.empty()) {
            throw UsageError("no store configured (use --store, GSE_STORE_PATH or the config file)");
        }
        RegistryOptions options;
        options.store_path = config_.store_path;
        options.planner = planner_config();
        options.model_factory = [this] { return model_client(); };
        return std::make_unique<Registry>(std::move(options));
    }

    Schema schema_file(const std::string& path) const { return parse_schema(read_file(path)); }
    StlProgram program_file(const std::string& path) const { return parse_program(read_file(path)); }

    int schema_register() {
        std::string text = read_file(o_.file);
        std::string subject = o_.subject.empty() ? parse_schema(text).subject : o_.subject;
        auto entry = registry()->register_schema(subject, text);
        out_ << Document{{"id", entry.id.id}, {"version", entry.version}}.dump() << '\n';
        return 0;
    }

    int schema_get() {
        auto reg = registry();
        RegisteredSchema entry;
        if (o_.id != 0) {
            entry = reg->get_schema(o_.id);
        } else if (!o_.subject.empty()) {
            if (o_.version.empty() || o_.version == "latest") {
                entry = reg->latest(o_.subject);
            } else {
                try {
                    entry = reg->get_version(o_.subject, std::stoll(o_.version));
                } catch (const std::logic_error&) {
                    throw UsageError("invalid version '" + o_.version + "'");
                }
            }
        } else {
            throw UsageError("schema get needs --id or --subject");
        }
        out_ << "# id " << entry.id.id << "\n" << serialize_schema(entry.schema);
        return 0;
    }

    int schema_list() {
        auto reg = registry();
        for (const auto& subject : reg->subjects()) {
            out_ << subject << ':';
            for (auto v : reg->versions(subject)) {
                auto entry = reg->get_version(subject, v);
                out_ << " v" << v << "=" << entry.id.id;
            }
            out_ << '\n';
        }
        return 0;
    }

    int compat_check() {
        CompatReport report;
        if (!o_.subject.empty()) {
            if (o_.new_file.empty()) {
                throw UsageError("compat check --subject needs --new");
            }
            report = registry()->check_compat(o_.subject, read_file(o_.new_file));
        } else {
            if (o_.old_file.empty() || o_.new_file.empty()) {
                throw UsageError("compat check needs --old and --new, or --subject and --new");
            }
            auto mode = parse_compatibility_mode(o_.mode.empty() ? "BACKWARD" : o_.mode);
            if (!mode) {
                throw UsageError("unknown compatibility mode '" + o_.mode + "'");
            }
            Schema old_schema = schema_file(o_.old_file);
            Schema new_schema = schema_file(o_.new_file);
            if (*mode == CompatibilityMode::Semantic) {
                auto program = plan_heuristic(new_schema, old_schema, planner_config());
                report.mode = CompatibilityMode::Semantic;
                if (program.aborts()) {
                    report.violations.push_back({"", "semantic-match", program.match.reason});
                }
                for (const auto& c : program.commands) {
                    if (auto* m = std::get_if<cmd::Missing>(&c)) {
                        report.violations.push_back({m->target.str(), "semantic-missing", m->reason});
                    }
                }
                for (const auto& d : validate_program(program, new_schema, old_schema)) {
                    report.violations.push_back({d.path.value_or(""), "semantic-" + d.code, d.message});
                }
            } else {
                report = check_structural_compat(old_schema, new_schema, *mode);
            }
        }
        for (const auto& v : report.violations) {
            err_ << "[" << v.rule << "] " << v.path << ": " << v.message << '\n';
        }
        out_ << (report.compatible() ? "compatible" : "incompatible") << " (" << to_string(report.mode) << ")\n";
        return report.compatible() ? 0 : 1;
    }

    int map_generate() {
        Schema source = schema_file(o_.source);
        Schema target = schema_file(o_.target);
        PlannerConfig pc = planner_config();
        StlProgram program;
        std::vector<Diagnostic> diagnostics;
        switch (pc.engine) {
            case Engine::Heuristic:
                program = plan_heuristic(source, target, pc);
                diagnostics = validate_program(program, source, target);
                break;
            case Engine::Model: {
                auto client = model_client();
                auto result = plan_with_model(*client, source, target, pc);
                program = std::move(result.program);
                diagnostics = std::move(result.diagnostics);
                if (result.repair_rounds_used > 0) {
                    err_ << "repair rounds used: " << result.repair_rounds_used << '\n';
                }
                break;
            }
            case Engine::Manual: throw UsageError("map generate does not support engine 'manual'");
        }
        out_ << serialize_program(program);
        print_diagnostics(diagnostics, err_);
        return diagnostics.empty() ? 0 : 1;
    }

    int map_validate() {
        auto diagnostics = validate_program(program_file(o_.mapping), schema_file(o_.source), schema_file(o_.target));
        print_diagnostics(diagnostics, err_);
        out_ << (diagnostics.empty() ? "valid" : "invalid: " + std::to_string(diagnostics.size()) + " diagnostic(s)")
             << '\n';
        return diagnostics.empty() ? 0 : 1;
    }

    int map_show() {
        if (!o_.mapping.empty()) {
            StlProgram p = program_file(o_.mapping);
            out_ << "MATCH " << (p.match.same_entity ? "true" : "false");
            if (!p.match.reason.empty()) {
                out_ << " (" << p.match.reason << ")";
            }
            out_ << '\n';
            for (std::size_t i = 0; i < p.commands.size(); ++i) {
                out_ << i + 1 << ". " << describe_command(p.commands[i]) << '\n';
            }
            return 0;
        }
        if (o_.source_id == 0 || o_.target_id == 0) {
            throw UsageError("map show needs --mapping or --source-id and --target-id");
        }
        auto record = registry()->get_mapping(o_.source_id, o_.target_id);
        out_ << emit_document(mapping_record_to_document(record));
        return 0;
    }

    int mapping_create() {
        require_pair();
        Engine engine = engine_of(config_.engine);
        std::optional<StlProgram> manual;
        if (engine == Engine::Manual) {
            if (o_.mapping.empty()) {
                throw UsageError("engine 'manual' needs --mapping");
            }
            manual = program_file(o_.mapping);
        }
        auto record = registry()->create_mapping(o_.source_id, o_.target_id, engine, manual);
        out_ << emit_document(mapping_record_to_document(record));
        print_diagnostics(record.diagnostics, err_);
        return 0;
    }

    int mapping_decide(Decision decision) {
        require_pair();
        auto record = registry()->decide_mapping(o_.source_id, o_.target_id, decision);
        out_ << "mapping " << record.source_id << " -> " << record.target_id << ": " << to_string(record.status)
             << '\n';
        return 0;
    }

    int compile_cmd() {
        CompiledArtifact artifact;
        if (o_.source_id != 0 || o_.target_id != 0) {
            require_pair();
            auto reg = registry();
            auto record = reg->get_mapping(o_.source_id, o_.target_id);
            artifact = compile(record.program, reg->get_schema(o_.source_id).schema,
                               reg->get_schema(o_.target_id).schema, config_.backend);
        } else {
            if (o_.mapping.empty() || o_.source.empty() || o_.target.empty()) {
                throw UsageError("compile needs --mapping, --source and --target, or --source-id and --target-id");
            }
            artifact = compile(program_file(o_.mapping), schema_file(o_.source), schema_file(o_.target),
                               config_.backend);
        }
        out_ << artifact.body;
        return 0;
    }

    int apply_cmd() {
        StlProgram program = program_file(o_.mapping);
        Schema source = schema_file(o_.source);
        Schema target = schema_file(o_.target);
        std::ifstream file;
        std::istream* in = &std::cin;
        if (o_.records != "-") {
            file.open(o_.records, std::ios::binary);
            if (!file) {
                throw Error("cannot read " + o_.records);
            }
            in = &file;
        }
        std::ofstream out_file;
        std::ostream* out = &out_;
        if (!o_.output.empty()) {
            out_file.open(o_.output, std::ios::binary | std::ios::trunc);
            if (!out_file) {
                throw Error("cannot write " + o_.output);
            }
            out = &out_file;
        }
        std::string line;
        std::size_t line_no = 0;
        std::size_t failures = 0;
        while (std::getline(*in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            try {
                *out << serialize_record(transform(program, parse_record(line, source), source, target)) << '\n';
            } catch (const TransformError& e) {
                ++failures;
                err_ << "line " << line_no << ": [" << to_string(e.kind()) << "] "
                     << (e.path() ? *e.path() + ": " : "") << e.detail() << '\n';
            } catch (const ParseError& e) {
                ++failures;
                err_ << "line " << line_no << ": [parse] " << e.what() << '\n';
            }
        }
        return failures == 0 ? 0 : 1;
    }

    int eval_cmd() {
        auto cases = load_corpus(o_.corpus);
        PlannerConfig pc = planner_config();
        ClientFactory factory;
        if (pc.engine == Engine::Model && !config_.model_url.empty()) {
            factory = [this](const GoldCase& c) -> std::unique_ptr<ModelClient> {
                if (c.transcript) {
                    return std::make_unique<ScriptedModelClient>(ScriptedModelClient::from_file(*c.transcript));
                }
                return std::make_unique<HttpModelClient>(config_.model_url, config_.model_key, config_.model_name);
            };
        }
        auto report = evaluate_corpus(cases, pc, factory);
        out_ << format_report(report);
        return 0;
    }

    int serve_cmd() {
        auto reg = registry();
        auto [host, port] = parse_listen_addr(config_.listen_addr);
        HttpService service(*reg);
        err_ << "gse: serving " << config_.store_path << " on " << host << ":" << port << std::endl;
        if (!service.listen(host, port)) {
            throw Error("cannot listen on " + config_.listen_addr);
        }
        return 0;
    }

private:
    void require_pair() const {
        if (o_.source_id == 0 || o_.target_id == 0) {
            throw UsageError("--source-id and --target-id are required");
        }
    }

    const Options& o_;
    std::ostream& out_;
    std::ostream& err_;
    CliConfig config_;
};

}  // namespace

CliConfig load_config_file(const std::filesystem::path& path, CliConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot read config file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    Document doc = parse_document(buffer.str());
    if (doc.is_null()) {
        return base;
    }
    if (!doc.is_object()) {
        throw ParseError("config file must be a map");
    }
    static const std::vector<std::string> known = {"store", "listen", "model_url", "model_key",
                                                   "model_name", "engine", "backend"};
    for (const auto& [key, value] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ParseError("config file: unknown key '" + key + "'");
        }
    }
    set_string(doc, "store", base.store_path);
    set_string(doc, "listen", base.listen_addr);
    set_string(doc, "model_url", base.model_url);
    set_string(doc, "model_key", base.model_key);
    set_string(doc, "model_name", base.model_name);
    set_string(doc, "engine", base.engine);
    set_string(doc, "backend", base.backend);
    return base;
}

CliConfig apply_environment(CliConfig base) {
    set_env("GSE_STORE_PATH", base.store_path);
    set_env("GSE_LISTEN_ADDR", base.listen_addr);
    set_env("GSE_MODEL_URL", base.model_url);
    set_env("GSE_MODEL_KEY", base.model_key);
    set_env("GSE_MODEL_NAME", base.model_name);
    return base;
}

CliConfig default_config() {
    CliConfig config;
    const char* explicit_path = std::getenv("GSE_CONFIG");
    if (explicit_path != nullptr && *explicit_path != '\0') {
        config = load_config_file(explicit_path);
    } else if (std::filesystem::exists("gse.config")) {
        config = load_config_file("gse.config");
    }
    return apply_environment(config);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Schema registry toolchain: schemas, mappings, compilation and evaluation.", "gse"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.add_option("--config", o.config_file, "Config file (default: $GSE_CONFIG or ./gse.config)");
    app.add_option("--store", o.store, "Store log path (overrides GSE_STORE_PATH)");
    app.add_option("--listen", o.listen, "Listen address host:port (overrides GSE_LISTEN_ADDR)");
    app.add_option("--engine", o.engine, "Planner engine: heuristic, model or manual");
    app.add_option("--backend", o.backend, "Compile backend: portable, pipeline-expr or sql-view");

    auto add_planner_flags = [&](CLI::App* sub) {
        sub->add_option("--engine", o.engine, "Planner engine");
        sub->add_option("--transcript", o.transcript, "Replay model answers from a transcript file");
        sub->add_flag("--prefer-gen", o.prefer_gen, "Use GEN/APPLY for affine unit conversions with an offset");
        sub->add_option("--threshold", o.threshold, "Name similarity threshold")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--repair-rounds", o.repair_rounds, "Model re-prompts allowed")->check(CLI::Range(0, 5));
    };
    auto add_pair = [&](CLI::App* sub) {
        sub->add_option("--source-id", o.source_id, "Registered source schema id");
        sub->add_option("--target-id", o.target_id, "Registered target schema id");
    };

    auto* schema = app.add_subcommand("schema", "Register and read schemas in the store");
    schema->require_subcommand(1);
    auto* schema_register = schema->add_subcommand("register", "Register a schema document");
    schema_register->add_option("--subject", o.subject, "Subject (default: the document's subject)");
    schema_register->add_option("file", o.file, "Schema document")->required();
    auto* schema_get = schema->add_subcommand("get", "Print a registered schema");
    schema_get->add_option("--subject", o.subject, "Subject");
    schema_get->add_option("--version", o.version, "Version number or 'latest'");
    schema_get->add_option("--id", o.id, "Schema id");
    auto* schema_list = schema->add_subcommand("list", "List subjects with their versions and ids");

    auto* compat = app.add_subcommand("compat", "Compatibility checks");
    compat->require_subcommand(1);
    auto* compat_check = compat->add_subcommand("check", "Check a new schema version against an old one");
    compat_check->add_option("--old", o.old_file, "Old schema document");
    compat_check->add_option("--new", o.new_file, "New schema document")->required();
    compat_check->add_option("--mode", o.mode, "NONE, BACKWARD, FORWARD, FULL or SEMANTIC");
    compat_check->add_option("--subject", o.subject, "Check against the latest version in the store");

    auto* map = app.add_subcommand("map", "Generate, validate and show mappings");
    map->require_subcommand(1);
    auto* map_generate = map->add_subcommand("generate", "Plan a mapping from source to target");
    map_generate->add_option("--source", o.source, "Source schema document")->required();
    map_generate->add_option("--target", o.target, "Target schema document")->required();
    add_planner_flags(map_generate);
    auto* map_validate = map->add_subcommand("validate", "Validate a mapping against its schemas");
    map_validate->add_option("--source", o.source, "Source schema document")->required();
    map_validate->add_option("--target", o.target, "Target schema document")->required();
    map_validate->add_option("--mapping", o.mapping, "Mapping document")->required();
    auto* map_show = map->add_subcommand("show", "Show a mapping file or a stored mapping record");
    map_show->add_option("--mapping", o.mapping, "Mapping document");
    add_pair(map_show);

    auto* mapping = app.add_subcommand("mapping", "Create and decide stored mappings");
    mapping->require_subcommand(1);
    auto* mapping_create = mapping->add_subcommand("create", "Plan and store a pending mapping");
    add_pair(mapping_create);
    add_planner_flags(mapping_create);
    mapping_create->add_option("--mapping", o.mapping, "Program for engine 'manual'");
    auto* mapping_approve = mapping->add_subcommand("approve", "Approve the pending mapping");
    add_pair(mapping_approve);
    auto* mapping_reject = mapping->add_subcommand("reject", "Reject the pending mapping");
    add_pair(mapping_reject);

    auto* compile_sub = app.add_subcommand("compile", "Compile a mapping with a backend");
    compile_sub->add_option("--backend", o.backend, "portable, pipeline-expr or sql-view");
    compile_sub->add_option("--mapping", o.mapping, "Mapping document");
    compile_sub->add_option("--source", o.source, "Source schema document");
    compile_sub->add_option("--target", o.target, "Target schema document");
    add_pair(compile_sub);

    auto* apply = app.add_subcommand("apply", "Transform line-delimited records");
    apply->add_option("--mapping", o.mapping, "Mapping document")->required();
    apply->add_option("--source", o.source, "Source schema document")->required();
    apply->add_option("--target", o.target, "Target schema document")->required();
    apply->add_option("--records", o.records, "Input records, one per line ('-' for stdin)")->required();
    apply->add_option("--output", o.output, "Output file (default: stdout)");

    auto* eval = app.add_subcommand("eval", "Score a planner engine on a gold corpus");
    eval->add_option("--corpus", o.corpus, "Corpus directory with corpus.yaml")->required();
    add_planner_flags(eval);

    auto* serve = app.add_subcommand("serve", "Run the registry HTTP service");
    serve->add_option("--listen", o.listen, "Listen address host:port");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "gse: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    Runner runner(o, out, err);
    try {
        runner.resolve_config();
        if (schema_register->parsed()) return runner.schema_register();
        if (schema_get->parsed()) return runner.schema_get();
        if (schema_list->parsed()) return runner.schema_list();
        if (compat_check->parsed()) return runner.compat_check();
        if (map_generate->parsed()) return runner.map_generate();
        if (map_validate->parsed()) return runner.map_validate();
        if (map_show->parsed()) return runner.map_show();
        if (mapping_create->parsed()) return runner.mapping_create();
        if (mapping_approve->parsed()) return runner.mapping_decide(Decision::Approve);
        if (mapping_reject->parsed()) return runner.mapping_decide(Decision::Reject);
        if (compile_sub->parsed()) return runner.compile_cmd();
        if (apply->parsed()) return runner.apply_cmd();
        if (eval->parsed()) return runner.eval_cmd();
        if (serve->parsed()) return runner.serve_cmd();
    } catch (const UsageError& e) {
        err << "gse: " << e.what() << '\n';
        return 2;
    } catch (const TransformError& e) {
        err << "gse: [" << to_string(e.kind()) << "] " << (e.path() ? *e.path() + ": " : "") << e.detail() << '\n';
        return 1;
    } catch (const RegistryError& e) {
        err << "gse: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "gse: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "gse: " << e.what() << '\n';
        return 1;
    }
    err << app.help();
    return 2;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return dispatch(args, out, err);
}

}  // namespace gse::cli
