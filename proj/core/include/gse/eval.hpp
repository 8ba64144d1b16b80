#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gse/planner.hpp"
#include "gse/schema.hpp"
#include "gse/stl.hpp"

namespace gse {

struct EvalResult {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
};

/// Precision and recall are 1 on empty denominators; f1 is 0 when p + r = 0.
EvalResult make_result(std::size_t tp, std::size_t fp, std::size_t fn);
double f1_score(double precision, double recall);

/// Same variant, paths and parameters; numbers within 1e-9 relative
/// tolerance, LINK tables as maps, expressions by canonical printing.
bool commands_match(const StlCommand& predicted, const StlCommand& gold);

/// Command-level scoring, MATCH excluded. Each gold command, in order, claims
/// the first unclaimed equal predicted command.
EvalResult score_program(const StlProgram& predicted, const StlProgram& gold);

struct GoldCase {
    std::string name;
    Schema source;
    Schema target;
    StlProgram gold;
    /// Recorded model answers, used by Engine::Model when present.
    std::optional<std::filesystem::path> transcript;
};

/// Reads `corpus.yaml`: `cases: [{name, source, target, gold, transcript?}]`
/// with paths relative to the directory. Throws ParseError or Error.
std::vector<GoldCase> load_corpus(const std::filesystem::path& dir);

struct CaseScore {
    std::string name;
    EvalResult result;
    /// Planner failure; the case then scores f1 = 0.
    std::optional<std::string> error;
    double seconds = 0.0;
};

struct CorpusReport {
    std::vector<CaseScore> cases;
    double macro_f1 = 0.0;
};

/// Builds the client for a case under Engine::Model.
using ClientFactory = std::function<std::unique_ptr<ModelClient>(const GoldCase&)>;

/// Plans every case with `config.engine` and scores it against gold. The
/// manual engine replays the gold program. Default model clients replay the
/// case transcript, else call the endpoint from the environment. Throws
/// std::invalid_argument on an empty corpus.
CorpusReport evaluate_corpus(const std::vector<GoldCase>& cases, const PlannerConfig& config,
                             const ClientFactory& client_factory = {});

/// Fixed-width table with one row per case and a macro-average row.
std::string format_report(const CorpusReport& report);

}  // namespace gse
