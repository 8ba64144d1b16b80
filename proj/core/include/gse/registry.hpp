#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gse/error.hpp"
#include "gse/model_client.hpp"
#include "gse/planner.hpp"
#include "gse/schema.hpp"
#include "gse/stl.hpp"
#include "gse/store_log.hpp"
#include "gse/validate.hpp"

namespace gse {

enum class MappingStatus { Pending, Approved, Rejected };
enum class Decision { Approve, Reject };

std::string_view to_string(MappingStatus status) noexcept;
std::optional<MappingStatus> parse_mapping_status(std::string_view name) noexcept;
std::optional<Decision> parse_decision(std::string_view name) noexcept;

struct RegisteredSchema {
    SchemaId id;
    std::string subject;
    std::int64_t version = 1;
    Schema schema;

    friend bool operator==(const RegisteredSchema&, const RegisteredSchema&) = default;
};

struct MappingRecord {
    std::uint32_t source_id = 0;
    std::uint32_t target_id = 0;
    StlProgram program;
    MappingStatus status = MappingStatus::Pending;
    std::vector<Diagnostic> diagnostics;
    std::string created_at;
    std::optional<std::string> decided_at;
    Engine engine = Engine::Heuristic;

    bool has_missing() const noexcept;
    /// SEMANTIC compatibility: no diagnostics, no MISSING, same entity.
    bool semantically_compatible() const noexcept;

    friend bool operator==(const MappingRecord&, const MappingRecord&) = default;
};

Document mapping_record_to_document(const MappingRecord& record);
MappingRecord mapping_record_from_document(const Document& doc);

enum class RegistryErrorKind {
    NotFound,      ///< unknown subject, version, schema id or mapping
    Conflict,      ///< a non-rejected mapping already exists for the pair
    Incompatible,  ///< registration refused by the subject's compatibility mode
    Rejected,      ///< decision refused by rule
};

class RegistryError : public Error {
public:
    RegistryError(RegistryErrorKind kind, std::string message, std::optional<CompatReport> report = std::nullopt);

    RegistryErrorKind kind() const noexcept { return kind_; }
    const std::optional<CompatReport>& report() const noexcept { return report_; }

private:
    RegistryErrorKind kind_;
    std::optional<CompatReport> report_;
};

struct RegistryOptions {
    /// Empty keeps all state in memory.
    std::filesystem::path store_path;
    CompatibilityMode default_mode = CompatibilityMode::Semantic;
    PlannerConfig planner;
    /// Source of model clients for Engine::Model; defaults to
    /// HttpModelClient::from_env.
    std::function<std::unique_ptr<ModelClient>()> model_factory;
    /// Timestamp source; defaults to UTC ISO-8601 wall-clock time.
    std::function<std::string()> clock;
};

/// Schema registry plus mapping store. Writers serialize on one mutex and
/// append to the log before publishing a new immutable state; readers work
/// on the snapshot they grabbed.
class Registry {
public:
    explicit Registry(RegistryOptions options = {});
    ~Registry();

    Registry(const Registry&) = delete;
    Registry& operator=(const Registry&) = delete;

    /// Subject and version in the document are replaced by `subject` and the
    /// assigned version. Re-registering identical content returns the
    /// existing entry. Throws ParseError or RegistryError(Incompatible).
    RegisteredSchema register_schema(const std::string& subject, std::string_view document);

    std::vector<std::string> subjects() const;
    std::vector<std::int64_t> versions(const std::string& subject) const;
    RegisteredSchema get_version(const std::string& subject, std::int64_t version) const;
    RegisteredSchema latest(const std::string& subject) const;
    RegisteredSchema get_schema(std::uint32_t id) const;

    CompatibilityMode config(const std::string& subject) const;
    void set_config(const std::string& subject, CompatibilityMode mode);

    /// Dry run of registration against the latest version. Under SEMANTIC
    /// the heuristic planner maps the candidate onto the latest version and
    /// every finding of the verdict becomes a violation.
    CompatReport check_compat(const std::string& subject, std::string_view document) const;

    /// Plans and stores a pending mapping. `manual` is required for
    /// Engine::Manual and ignored otherwise. Throws RegistryError(NotFound,
    /// Conflict), TransportError, ProtocolError.
    MappingRecord create_mapping(std::uint32_t source_id, std::uint32_t target_id, Engine engine,
                                 const std::optional<StlProgram>& manual = std::nullopt);
    /// Most recent record for the pair.
    MappingRecord get_mapping(std::uint32_t source_id, std::uint32_t target_id) const;
    std::vector<MappingRecord> mappings() const;
    MappingRecord decide_mapping(std::uint32_t source_id, std::uint32_t target_id, Decision decision);

    /// Passes frames already in the consumer's schema through unchanged;
    /// otherwise runs the approved mapping and re-frames. Throws ParseError
    /// (framing, payload), RegistryError(NotFound), TransformError.
    std::string transform_framed(std::string_view message, std::uint32_t consumer_schema_id) const;

    /// Full state as a document, for audits and replay comparisons.
    Document state_document() const;
    std::uint64_t last_sequence() const;

    struct State;

private:
    std::shared_ptr<const State> snapshot() const;
    void publish(std::shared_ptr<const State> next);
    std::string now() const;

    RegistryOptions options_;
    std::unique_ptr<StoreLog> log_;
    mutable std::mutex write_mutex_;
    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<const State> state_;
};

}  // namespace gse
