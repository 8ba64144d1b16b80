#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gse/schema.hpp"
#include "gse/stl.hpp"
#include "gse/value.hpp"

namespace gse {

struct CompiledArtifact {
    std::string backend_name;
    std::string media_type;
    std::string body;

    friend bool operator==(const CompiledArtifact&, const CompiledArtifact&) = default;
};

/// Turns a validated program into text for a data-path platform. Stateless.
class Backend {
public:
    virtual ~Backend() = default;

    virtual std::string_view name() const noexcept = 0;
    virtual std::string_view media_type() const noexcept = 0;
    /// Called only with programs that validate cleanly. Throws CompileError.
    virtual std::string emit(const StlProgram& program, const Schema& source, const Schema& target) const = 0;
};

/// Built-in backends: "portable", "pipeline-expr", "sql-view".
const std::vector<std::shared_ptr<const Backend>>& builtin_backends();
/// nullptr when unknown.
const Backend* find_backend(std::string_view name);

/// Validates, then emits. Throws CompileError for an unknown backend, a
/// program with diagnostics, or a command the backend cannot express.
CompiledArtifact compile(const StlProgram& program, const Schema& source, const Schema& target,
                         std::string_view backend);

/// Evaluates a "pipeline-expr" body against a source record and conforms the
/// result to `target`. Throws TransformError.
Value run_pipeline_expr(std::string_view body, const Value& record, const Schema& source, const Schema& target);

}  // namespace gse
