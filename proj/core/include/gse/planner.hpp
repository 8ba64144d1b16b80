#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gse/model_client.hpp"
#include "gse/schema.hpp"
#include "gse/stl.hpp"
#include "gse/validate.hpp"

namespace gse {

enum class Engine { Model, Heuristic, Manual };

std::string_view to_string(Engine engine) noexcept;
std::optional<Engine> parse_engine(std::string_view name) noexcept;

struct PlannerConfig {
    Engine engine = Engine::Heuristic;
    /// Re-prompts allowed after the first model answer; at most 5.
    int repair_rounds = 2;
    double similarity_threshold = 0.55;
    /// Emit GEN + APPLY instead of producer + SCALE + SHIFT for affine unit
    /// conversions with a nonzero offset.
    bool prefer_gen = false;

    /// Throws std::invalid_argument when out of range.
    void check() const;
};

struct PlanResult {
    StlProgram program;
    std::vector<Diagnostic> diagnostics;
    int repair_rounds_used = 0;
};

/// Lowercased name tokens: splits on `_`, non-alphanumerics, camelCase humps
/// and letter/digit boundaries.
std::vector<std::string> name_tokens(std::string_view name);
std::size_t levenshtein(std::string_view a, std::string_view b);
/// Set Jaccard; two empty lists give 1.
double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);
/// 0.5 * token Jaccard + 0.5 * (1 - Levenshtein / max length) over the
/// `_`-joined tokens.
double name_similarity(std::string_view a, std::string_view b);
/// Token Jaccard over subject and doc, ignoring stopwords.
double entity_similarity(const Schema& source, const Schema& target);

/// Deterministic schema matcher: greedy field assignment by name similarity,
/// then pairing of mutually unique leftovers of the same kind.
StlProgram plan_heuristic(const Schema& source, const Schema& target, const PlannerConfig& config = {});

/// Prompt sent on the first round.
std::string planner_prompt(const Schema& source, const Schema& target);

/// Asks `client` for tool invocations, converts them to a program, validates
/// and re-prompts with the diagnostics while repair rounds remain. Throws
/// ProtocolError when the last answer still uses unknown tools or malformed
/// arguments, TransportError on transport failure.
PlanResult plan_with_model(ModelClient& client, const Schema& source, const Schema& target,
                           const PlannerConfig& config = {});

}  // namespace gse
