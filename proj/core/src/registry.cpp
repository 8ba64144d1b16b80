#include "gse/registry.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "gse/framing.hpp"
#include "gse/interpreter.hpp"

namespace gse {

struct Registry::State {
    /// Index is id - 1.
    std::vector<RegisteredSchema> schemas;
    /// Schema ids per subject in version order.
    std::map<std::string, std::vector<std::uint32_t>> subjects;
    std::map<std::string, CompatibilityMode> configs;
    std::vector<MappingRecord> mappings;
    std::uint64_t sequence = 0;
};

namespace {

bool contains_missing(const StlProgram& program) {
    return std::any_of(program.commands.begin(), program.commands.end(),
                       [](const StlCommand& c) { return std::holds_alternative<cmd::Missing>(c); });
}

std::string utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

const RegisteredSchema& schema_by_id(const Registry::State& state, std::uint32_t id) {
    if (id == 0 || id > state.schemas.size()) {
        throw RegistryError(RegistryErrorKind::NotFound, "unknown schema id " + std::to_string(id));
    }
    return state.schemas[id - 1];
}

const RegisteredSchema* latest_of(const Registry::State& state, const std::string& subject) {
    auto it = state.subjects.find(subject);
    if (it == state.subjects.end() || it->second.empty()) {
        return nullptr;
    }
    return &state.schemas[it->second.back() - 1];
}

/// Index of the record `decide` acts on: the newest pending one.
std::optional<std::size_t> pending_index(const Registry::State& state, std::uint32_t source, std::uint32_t target) {
    for (std::size_t i = state.mappings.size(); i-- > 0;) {
        const auto& m = state.mappings[i];
        if (m.source_id == source && m.target_id == target && m.status == MappingStatus::Pending) {
            return i;
        }
    }
    return std::nullopt;
}

Document schema_event(const RegisteredSchema& s) {
    Document d = Document::object();
    d["id"] = s.id.id;
    d["subject"] = s.subject;
    d["version"] = s.version;
    d["fingerprint"] = s.id.fingerprint;
    d["schema"] = schema_to_document(s.schema);
    return d;
}

void apply_event(Registry::State& state, const StoreEvent& event) {
    const Document& d = event.data;
    switch (event.kind) {
        case EventKind::SchemaRegistered: {
            RegisteredSchema s;
            s.id.id = d.at("id").get<std::uint32_t>();
            s.id.fingerprint = d.at("fingerprint").get<std::uint64_t>();
            s.subject = d.at("subject").get<std::string>();
            s.version = d.at("version").get<std::int64_t>();
            s.schema = schema_from_document(d.at("schema"));
            if (s.id.id != state.schemas.size() + 1) {
                throw Error("store log: schema id " + std::to_string(s.id.id) + " out of sequence");
            }
            state.subjects[s.subject].push_back(s.id.id);
            state.schemas.push_back(std::move(s));
            break;
        }
        case EventKind::ConfigChanged: {
            auto mode = parse_compatibility_mode(d.at("mode").get<std::string>());
            if (!mode) {
                throw Error("store log: unknown compatibility mode");
            }
            state.configs[d.at("subject").get<std::string>()] = *mode;
            break;
        }
        case EventKind::MappingCreated:
            state.mappings.push_back(mapping_record_from_document(d));
            break;
        case EventKind::MappingDecided: {
            auto src = d.at("source_id").get<std::uint32_t>();
            auto tgt = d.at("target_id").get<std::uint32_t>();
            auto index = pending_index(state, src, tgt);
            auto status = parse_mapping_status(d.at("status").get<std::string>());
            if (!index || !status) {
                throw Error("store log: decision without a pending mapping");
            }
            state.mappings[*index].status = *status;
            state.mappings[*index].decided_at = d.at("decided_at").get<std::string>();
            break;
        }
    }
    state.sequence = event.sequence;
}

CompatReport semantic_report(const Schema& latest, const Schema& candidate, const PlannerConfig& config) {
    CompatReport report;
    report.mode = CompatibilityMode::Semantic;
    StlProgram program = plan_heuristic(candidate, latest, config);
    if (program.aborts()) {
        report.violations.push_back({"", "semantic-match", "schemas do not describe the same entity: " +
                                                               program.match.reason});
    }
    for (const auto& c : program.commands) {
        if (const auto* m = std::get_if<cmd::Missing>(&c)) {
            report.violations.push_back({m->target.str(), "semantic-missing",
                                         "no mapping from the new version produces this field"});
        }
    }
    for (const auto& d : validate_program(program, candidate, latest)) {
        report.violations.push_back({d.path.value_or(""), "semantic-" + d.code, d.message});
    }
    return report;
}

}  // namespace

std::string_view to_string(MappingStatus status) noexcept {
    switch (status) {
        case MappingStatus::Pending: return "pending";
        case MappingStatus::Approved: return "approved";
        case MappingStatus::Rejected: return "rejected";
    }
    return "pending";
}

std::optional<MappingStatus> parse_mapping_status(std::string_view name) noexcept {
    if (name == "pending") return MappingStatus::Pending;
    if (name == "approved") return MappingStatus::Approved;
    if (name == "rejected") return MappingStatus::Rejected;
    return std::nullopt;
}

std::optional<Decision> parse_decision(std::string_view name) noexcept {
    if (name == "approve") return Decision::Approve;
    if (name == "reject") return Decision::Reject;
    return std::nullopt;
}

bool MappingRecord::has_missing() const noexcept {
    return contains_missing(program);
}

bool MappingRecord::semantically_compatible() const noexcept {
    return diagnostics.empty() && !has_missing() && program.match.same_entity;
}

Document mapping_record_to_document(const MappingRecord& record) {
    Document d = Document::object();
    d["source_id"] = record.source_id;
    d["target_id"] = record.target_id;
    d["status"] = std::string(to_string(record.status));
    d["engine"] = std::string(to_string(record.engine));
    d["compatible"] = record.semantically_compatible();
    d["created_at"] = record.created_at;
    d["decided_at"] = record.decided_at ? Document(*record.decided_at) : Document();
    Document diags = Document::array();
    for (const auto& diag : record.diagnostics) {
        diags.push_back(diagnostic_to_document(diag));
    }
    d["diagnostics"] = std::move(diags);
    d["program"] = program_to_document(record.program);
    return d;
}

MappingRecord mapping_record_from_document(const Document& doc) {
    if (!doc.is_object()) {
        throw ParseError("mapping record must be a map");
    }
    MappingRecord r;
    try {
        r.source_id = doc.at("source_id").get<std::uint32_t>();
        r.target_id = doc.at("target_id").get<std::uint32_t>();
        auto status = parse_mapping_status(doc.at("status").get<std::string>());
        auto engine = parse_engine(doc.at("engine").get<std::string>());
        if (!status || !engine) {
            throw ParseError("mapping record has an unknown status or engine");
        }
        r.status = *status;
        r.engine = *engine;
        r.created_at = doc.at("created_at").get<std::string>();
        if (doc.contains("decided_at") && !doc.at("decided_at").is_null()) {
            r.decided_at = doc.at("decided_at").get<std::string>();
        }
        for (const auto& d : doc.at("diagnostics")) {
            r.diagnostics.push_back(diagnostic_from_document(d));
        }
        r.program = program_from_document(doc.at("program"));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed mapping record: ") + e.what());
    }
    return r;
}

RegistryError::RegistryError(RegistryErrorKind kind, std::string message, std::optional<CompatReport> report)
    : Error(std::move(message)), kind_(kind), report_(std::move(report)) {}

Registry::Registry(RegistryOptions options) : options_(std::move(options)) {
    options_.planner.check();
    auto state = std::make_shared<State>();
    if (options_.store_path.empty()) {
        log_ = std::make_unique<StoreLog>();
    } else {
        log_ = std::make_unique<StoreLog>(options_.store_path);
        for (const auto& event : log_->events()) {
            apply_event(*state, event);
        }
    }
    state_ = std::move(state);
}

Registry::~Registry() = default;

std::shared_ptr<const Registry::State> Registry::snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return state_;
}

void Registry::publish(std::shared_ptr<const State> next) {
    std::lock_guard lock(snapshot_mutex_);
    state_ = std::move(next);
}

std::string Registry::now() const {
    return options_.clock ? options_.clock() : utc_now();
}

RegisteredSchema Registry::register_schema(const std::string& subject, std::string_view document) {
    if (subject.empty()) {
        throw ParseError("subject must be non-empty");
    }
    Schema schema = parse_schema(document);
    schema.subject = subject;

    std::lock_guard lock(write_mutex_);
    auto current = snapshot();
    auto it = current->subjects.find(subject);
    if (it != current->subjects.end()) {
        const auto content = content_fingerprint(schema);
        for (std::uint32_t id : it->second) {
            const auto& existing = current->schemas[id - 1];
            if (content_fingerprint(existing.schema) == content) {
                return existing;
            }
        }
    }
    const RegisteredSchema* latest = latest_of(*current, subject);
    schema.version = latest ? latest->version + 1 : 1;
    auto mode_it = current->configs.find(subject);
    CompatibilityMode mode = mode_it == current->configs.end() ? options_.default_mode : mode_it->second;
    if (latest && mode != CompatibilityMode::Semantic) {
        CompatReport report = check_structural_compat(latest->schema, schema, mode);
        if (!report.compatible()) {
            std::string message = "schema is not " + std::string(to_string(mode)) + " compatible with " + subject +
                                  " v" + std::to_string(latest->version);
            for (const auto& v : report.violations) {
                message += "\n  [" + v.rule + "] " + v.path + ": " + v.message;
            }
            throw RegistryError(RegistryErrorKind::Incompatible, message, report);
        }
    }
    RegisteredSchema entry;
    entry.id.id = static_cast<std::uint32_t>(current->schemas.size() + 1);
    entry.id.fingerprint = fingerprint(schema);
    entry.subject = subject;
    entry.version = schema.version;
    entry.schema = std::move(schema);

    const StoreEvent& event = log_->append(EventKind::SchemaRegistered, schema_event(entry));
    auto next = std::make_shared<State>(*current);
    apply_event(*next, event);
    publish(std::move(next));
    return entry;
}

std::vector<std::string> Registry::subjects() const {
    auto s = snapshot();
    std::vector<std::string> out;
    for (const auto& [name, ids] : s->subjects) {
        out.push_back(name);
    }
    return out;
}

std::vector<std::int64_t> Registry::versions(const std::string& subject) const {
    auto s = snapshot();
    auto it = s->subjects.find(subject);
    if (it == s->subjects.end()) {
        throw RegistryError(RegistryErrorKind::NotFound, "unknown subject '" + subject + "'");
    }
    std::vector<std::int64_t> out;
    for (std::uint32_t id : it->second) {
        out.push_back(s->schemas[id - 1].version);
    }
    return out;
}

RegisteredSchema Registry::get_version(const std::string& subject, std::int64_t version) const {
    auto s = snapshot();
    auto it = s->subjects.find(subject);
    if (it != s->subjects.end()) {
        for (std::uint32_t id : it->second) {
            if (s->schemas[id - 1].version == version) {
                return s->schemas[id - 1];
            }
        }
    }
    throw RegistryError(RegistryErrorKind::NotFound,
                        "unknown version " + std::to_string(version) + " of subject '" + subject + "'");
}

RegisteredSchema Registry::latest(const std::string& subject) const {
    auto s = snapshot();
    if (const auto* l = latest_of(*s, subject)) {
        return *l;
    }
    throw RegistryError(RegistryErrorKind::NotFound, "unknown subject '" + subject + "'");
}

RegisteredSchema Registry::get_schema(std::uint32_t id) const {
    return schema_by_id(*snapshot(), id);
}

CompatibilityMode Registry::config(const std::string& subject) const {
    auto s = snapshot();
    auto it = s->configs.find(subject);
    return it == s->configs.end() ? options_.default_mode : it->second;
}

void Registry::set_config(const std::string& subject, CompatibilityMode mode) {
    if (subject.empty()) {
        throw ParseError("subject must be non-empty");
    }
    std::lock_guard lock(write_mutex_);
    auto current = snapshot();
    Document data = Document::object();
    data["subject"] = subject;
    data["mode"] = std::string(to_string(mode));
    const StoreEvent& event = log_->append(EventKind::ConfigChanged, std::move(data));
    auto next = std::make_shared<State>(*current);
    apply_event(*next, event);
    publish(std::move(next));
}

CompatReport Registry::check_compat(const std::string& subject, std::string_view document) const {
    Schema candidate = parse_schema(document);
    candidate.subject = subject;
    auto s = snapshot();
    CompatibilityMode mode = config(subject);
    const RegisteredSchema* latest = latest_of(*s, subject);
    if (latest == nullptr) {
        return CompatReport{mode, {}};
    }
    candidate.version = latest->version + 1;
    if (mode == CompatibilityMode::Semantic) {
        return semantic_report(latest->schema, candidate, options_.planner);
    }
    return check_structural_compat(latest->schema, candidate, mode);
}

MappingRecord Registry::create_mapping(std::uint32_t source_id, std::uint32_t target_id, Engine engine,
                                       const std::optional<StlProgram>& manual) {
    auto current = snapshot();
    const RegisteredSchema source = schema_by_id(*current, source_id);
    const RegisteredSchema target = schema_by_id(*current, target_id);

    MappingRecord record;
    record.source_id = source_id;
    record.target_id = target_id;
    record.engine = engine;
    switch (engine) {
        case Engine::Heuristic:
            record.program = plan_heuristic(source.schema, target.schema, options_.planner);
            record.diagnostics = validate_program(record.program, source.schema, target.schema);
            break;
        case Engine::Manual:
            if (!manual) {
                throw ParseError("engine 'manual' needs a program");
            }
            record.program = *manual;
            record.diagnostics = validate_program(record.program, source.schema, target.schema);
            break;
        case Engine::Model: {
            std::unique_ptr<ModelClient> client =
                options_.model_factory ? options_.model_factory()
                                       : std::make_unique<HttpModelClient>(HttpModelClient::from_env());
            PlanResult plan = plan_with_model(*client, source.schema, target.schema, options_.planner);
            record.program = std::move(plan.program);
            record.diagnostics = std::move(plan.diagnostics);
            break;
        }
    }
    record.program.source = SchemaRef{source.subject, source.version};
    record.program.target = SchemaRef{target.subject, target.version};

    // Planning runs outside the writer lock; the uniqueness check runs inside.
    std::lock_guard lock(write_mutex_);
    current = snapshot();
    for (const auto& m : current->mappings) {
        if (m.source_id == source_id && m.target_id == target_id && m.status != MappingStatus::Rejected) {
            throw RegistryError(RegistryErrorKind::Conflict,
                                "a " + std::string(to_string(m.status)) + " mapping from schema " +
                                    std::to_string(source_id) + " to " + std::to_string(target_id) +
                                    " already exists");
        }
    }
    record.created_at = now();
    const StoreEvent& event = log_->append(EventKind::MappingCreated, mapping_record_to_document(record));
    auto next = std::make_shared<State>(*current);
    apply_event(*next, event);
    publish(std::move(next));
    return record;
}

MappingRecord Registry::get_mapping(std::uint32_t source_id, std::uint32_t target_id) const {
    auto s = snapshot();
    for (std::size_t i = s->mappings.size(); i-- > 0;) {
        if (s->mappings[i].source_id == source_id && s->mappings[i].target_id == target_id) {
            return s->mappings[i];
        }
    }
    throw RegistryError(RegistryErrorKind::NotFound, "no mapping from schema " + std::to_string(source_id) + " to " +
                                                         std::to_string(target_id));
}

std::vector<MappingRecord> Registry::mappings() const {
    return snapshot()->mappings;
}

MappingRecord Registry::decide_mapping(std::uint32_t source_id, std::uint32_t target_id, Decision decision) {
    std::lock_guard lock(write_mutex_);
    auto current = snapshot();
    auto index = pending_index(*current, source_id, target_id);
    if (!index) {
        throw RegistryError(RegistryErrorKind::NotFound, "no pending mapping from schema " +
                                                             std::to_string(source_id) + " to " +
                                                             std::to_string(target_id));
    }
    const MappingRecord& pending = current->mappings[*index];
    if (decision == Decision::Approve && !pending.semantically_compatible()) {
        std::string why = !pending.program.match.same_entity ? "the program aborts (MATCH same_entity is false)"
                          : pending.has_missing()           ? "the program contains MISSING"
                                                            : std::to_string(pending.diagnostics.size()) +
                                                        " diagnostic(s) are unresolved";
        throw RegistryError(RegistryErrorKind::Rejected, "cannot approve mapping: " + why);
    }
    Document data = Document::object();
    data["source_id"] = source_id;
    data["target_id"] = target_id;
    data["status"] = decision == Decision::Approve ? "approved" : "rejected";
    data["decided_at"] = now();
    const StoreEvent& event = log_->append(EventKind::MappingDecided, std::move(data));
    auto next = std::make_shared<State>(*current);
    apply_event(*next, event);
    MappingRecord out = next->mappings[*index];
    publish(std::move(next));
    return out;
}

std::string Registry::transform_framed(std::string_view message, std::uint32_t consumer_schema_id) const {
    FramedMessage frame = decode_frame(message);
    if (frame.schema_id == consumer_schema_id) {
        return std::string(message);
    }
    auto s = snapshot();
    const RegisteredSchema& producer = schema_by_id(*s, frame.schema_id);
    const RegisteredSchema& consumer = schema_by_id(*s, consumer_schema_id);
    const MappingRecord* mapping = nullptr;
    for (const auto& m : s->mappings) {
        if (m.source_id == frame.schema_id && m.target_id == consumer_schema_id &&
            m.status == MappingStatus::Approved) {
            mapping = &m;
        }
    }
    if (mapping == nullptr) {
        throw RegistryError(RegistryErrorKind::NotFound,
                            "no approved mapping from schema " + std::to_string(frame.schema_id) + " (" +
                                producer.subject + " v" + std::to_string(producer.version) + ") to schema " +
                                std::to_string(consumer_schema_id) + " (" + consumer.subject + " v" +
                                std::to_string(consumer.version) + ")");
    }
    Value record = parse_record(frame.payload, producer.schema);
    Value out;
    try {
        out = transform(mapping->program, record, producer.schema, consumer.schema);
    } catch (const TransformError& e) {
        throw TransformError(e.kind(),
                             "mapping " + std::to_string(frame.schema_id) + " -> " +
                                 std::to_string(consumer_schema_id) + ": " + e.detail(),
                             e.path());
    }
    return encode_frame(consumer_schema_id, serialize_record(out));
}

Document Registry::state_document() const {
    auto s = snapshot();
    Document d = Document::object();
    d["sequence"] = s->sequence;
    Document schemas = Document::array();
    for (const auto& entry : s->schemas) {
        schemas.push_back(schema_event(entry));
    }
    d["schemas"] = std::move(schemas);
    Document configs = Document::object();
    for (const auto& [subject, mode] : s->configs) {
        configs[subject] = std::string(to_string(mode));
    }
    d["configs"] = std::move(configs);
    Document maps = Document::array();
    for (const auto& m : s->mappings) {
        maps.push_back(mapping_record_to_document(m));
    }
    d["mappings"] = std::move(maps);
    return d;
}

std::uint64_t Registry::last_sequence() const {
    return snapshot()->sequence;
}

}  // namespace gse
