#include "gse/planner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>
#include <tuple>

#include "gse/error.hpp"
#include "gse/units.hpp"

namespace gse {

namespace {

const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {"a",    "an",   "and",    "are",  "as",      "at",     "by",
                                                "for",  "from", "in",     "is",   "of",      "on",     "or",
                                                "the",  "to",   "with",   "this", "that",    "its",    "it",
                                                "data", "schema", "record", "records", "version", "v"};
    return words;
}

std::vector<std::string> text_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string word;
    auto flush = [&]() {
        if (!word.empty()) {
            for (auto& t : name_tokens(word)) {
                if (!stopwords().count(t)) {
                    out.push_back(std::move(t));
                }
            }
            word.clear();
        }
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            word += c;
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::string format_score(double d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", d);
    return buf;
}

/// Plain-data form of a literal, as it reads back from a document.
Value untyped(const Value& v) {
    return value_from_json(value_to_json(v));
}

std::optional<Value> natural_zero(const FieldType& type) {
    switch (type.kind) {
        case TypeKind::Integer: return Value{std::int64_t{0}};
        case TypeKind::Float: return Value{0.0};
        case TypeKind::String: return Value{std::string()};
        case TypeKind::Boolean: return Value{false};
        case TypeKind::Enum: return Value{type.variants.front()};
        case TypeKind::Object: return std::nullopt;
    }
    return std::nullopt;
}

FieldPath child(const FieldPath& prefix, const std::string& name) {
    FieldPath out = prefix;
    out.segments.push_back(name);
    return out;
}

bool subset(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return std::all_of(a.begin(), a.end(),
                       [&](const std::string& s) { return std::find(b.begin(), b.end(), s) != b.end(); });
}

/// Greedy one-to-one assignment over scored (i, j) pairs.
struct Scored {
    double score;
    std::size_t i;
    std::size_t j;
};

class HeuristicPlanner {
public:
    HeuristicPlanner(const Schema& source, const Schema& target, const PlannerConfig& config)
        : source_(source), target_(target), config_(config) {
        rank_sources(source.fields, FieldPath{});
    }

    StlProgram run() {
        StlProgram program;
        program.source = SchemaRef{source_.subject, source_.version};
        program.target = SchemaRef{target_.subject, target_.version};
        double sim = entity_similarity(source_, target_);
        program.match.same_entity = sim >= config_.similarity_threshold;
        program.match.reason = "subject/doc token similarity " + format_score(sim) +
                               (program.match.same_entity ? " >= " : " < ") +
                               format_score(config_.similarity_threshold);
        if (!program.match.same_entity) {
            return program;
        }
        plan_level(source_.fields, FieldPath{}, target_.fields, FieldPath{});
        std::stable_sort(deletes_.begin(), deletes_.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        program.commands = std::move(body_);
        for (auto& [rank, command] : deletes_) {
            program.commands.push_back(std::move(command));
        }
        return program;
    }

private:
    void rank_sources(const std::vector<Field>& fields, const FieldPath& prefix) {
        for (const auto& f : fields) {
            FieldPath p = child(prefix, f.name);
            ranks_.emplace_back(p);
            if (f.type.kind == TypeKind::Object) {
                rank_sources(f.type.fields, p);
            }
        }
    }

    std::size_t rank_of(const FieldPath& p) const {
        auto it = std::find(ranks_.begin(), ranks_.end(), p);
        return static_cast<std::size_t>(it - ranks_.begin());
    }

    void drop(const FieldPath& source_path) {
        deletes_.emplace_back(rank_of(source_path), cmd::Delete{source_path});
    }

    static bool units_compatible(const Field& s, const Field& t) {
        if (!s.unit || !t.unit) {
            return true;
        }
        auto conv = infer_unit_conversion(*s.unit, *t.unit);
        if (!conv) {
            return false;
        }
        if (conv->factor == 1.0 && conv->offset == 0.0) {
            return true;
        }
        return is_numeric(s.type.kind) && is_numeric(t.type.kind);
    }

    static bool compatible(const Field& s, const Field& t) {
        if (flag_symbol(s, t)) {
            return true;
        }
        bool kinds = s.type.kind == t.type.kind ||
                     (s.type.kind != TypeKind::Object && t.type.kind != TypeKind::Object &&
                      castable(s.type.kind, t.type.kind));
        return kinds && units_compatible(s, t);
    }

    /// A boolean source named after exactly one symbol of an enum target,
    /// e.g. battery_low -> {ok, low}.
    static std::optional<std::string> flag_symbol(const Field& s, const Field& t) {
        if (s.type.kind != TypeKind::Boolean || t.type.kind != TypeKind::Enum || t.type.variants.size() < 2) {
            return std::nullopt;
        }
        auto tokens = name_tokens(s.name);
        std::optional<std::string> found;
        for (const auto& v : t.type.variants) {
            auto vt = name_tokens(v);
            if (vt.size() == 1 && std::find(tokens.begin(), tokens.end(), vt.front()) != tokens.end()) {
                if (found) {
                    return std::nullopt;
                }
                found = v;
            }
        }
        return found;
    }

    /// Leftover pairing: same kind (or flag), and units declared on both
    /// sides or on neither.
    static bool residual_compatible(const Field& s, const Field& t) {
        if (flag_symbol(s, t)) {
            return true;
        }
        return s.type.kind == t.type.kind && s.unit.has_value() == t.unit.has_value() && compatible(s, t);
    }

    static std::vector<std::string> field_words(const Field& f) {
        auto out = name_tokens(f.name);
        if (f.description) {
            auto more = text_tokens(*f.description);
            out.insert(out.end(), more.begin(), more.end());
        }
        return out;
    }

    /// Index of the strictly best candidate by name+description overlap, if any.
    static std::optional<std::size_t> best_by_words(const Field& f, const std::vector<Field>& others,
                                                    const std::vector<std::size_t>& candidates) {
        double best = 0.0;
        double second = 0.0;
        std::optional<std::size_t> out;
        for (std::size_t k : candidates) {
            double score = jaccard(field_words(f), field_words(others[k]));
            if (score > best) {
                second = best;
                best = score;
                out = k;
            } else if (score > second) {
                second = score;
            }
        }
        return best > second ? out : std::nullopt;
    }

    /// Pairs a leftover target with a leftover source when each is the
    /// other's only candidate, or, among several, the mutual best by
    /// name and description words. With `required_only`, targets that
    /// declare a default are left for later (they have a fallback).
    static void residual(const std::vector<Field>& sf, const std::vector<Field>& tf, std::vector<bool>& s_used,
                         std::vector<bool>& t_used, std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                         bool required_only) {
        auto eligible = [&](std::size_t j) { return !t_used[j] && !(required_only && tf[j].default_value); };
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t j = 0; j < tf.size(); ++j) {
                if (!eligible(j)) {
                    continue;
                }
                std::vector<std::size_t> sources;
                for (std::size_t i = 0; i < sf.size(); ++i) {
                    if (!s_used[i] && residual_compatible(sf[i], tf[j])) {
                        sources.push_back(i);
                    }
                }
                if (sources.empty()) {
                    continue;
                }
                auto i = sources.size() == 1 ? std::optional(sources.front()) : best_by_words(tf[j], sf, sources);
                if (!i) {
                    continue;
                }
                std::vector<std::size_t> targets;
                for (std::size_t k = 0; k < tf.size(); ++k) {
                    if (eligible(k) && residual_compatible(sf[*i], tf[k])) {
                        targets.push_back(k);
                    }
                }
                auto back = targets.size() == 1 ? std::optional(targets.front()) : best_by_words(sf[*i], tf, targets);
                if (back == j) {
                    s_used[*i] = t_used[j] = true;
                    pairs.emplace_back(*i, j);
                    changed = true;
                }
            }
        }
    }

    /// Pairs (source index, target index) for one object level.
    std::vector<std::pair<std::size_t, std::size_t>> assign(const std::vector<Field>& sf,
                                                            const std::vector<Field>& tf) const {
        std::vector<Scored> scored;
        for (std::size_t i = 0; i < sf.size(); ++i) {
            for (std::size_t j = 0; j < tf.size(); ++j) {
                if (!compatible(sf[i], tf[j])) {
                    continue;
                }
                double score = name_similarity(sf[i].name, tf[j].name);
                if (score >= config_.similarity_threshold) {
                    scored.push_back({score, i, j});
                }
            }
        }
        std::sort(scored.begin(), scored.end(), [&](const Scored& a, const Scored& b) {
            if (a.score != b.score) {
                return a.score > b.score;
            }
            return std::tie(sf[a.i].name, tf[a.j].name) < std::tie(sf[b.i].name, tf[b.j].name);
        });
        std::vector<bool> s_used(sf.size(), false);
        std::vector<bool> t_used(tf.size(), false);
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (const auto& c : scored) {
            if (!s_used[c.i] && !t_used[c.j]) {
                s_used[c.i] = t_used[c.j] = true;
                pairs.emplace_back(c.i, c.j);
            }
        }
        residual(sf, tf, s_used, t_used, pairs, true);
        residual(sf, tf, s_used, t_used, pairs, false);
        return pairs;
    }

    void plan_level(const std::vector<Field>& sf, const FieldPath& sp, const std::vector<Field>& tf,
                    const FieldPath& tp) {
        auto pairs = assign(sf, tf);
        std::vector<bool> s_used(sf.size(), false);
        for (std::size_t j = 0; j < tf.size(); ++j) {
            auto it = std::find_if(pairs.begin(), pairs.end(), [&](const auto& p) { return p.second == j; });
            if (it == pairs.end()) {
                unmatched_target(tf[j], child(tp, tf[j].name));
            } else {
                s_used[it->first] = true;
                pair(sf[it->first], child(sp, sf[it->first].name), tf[j], child(tp, tf[j].name));
            }
        }
        for (std::size_t i = 0; i < sf.size(); ++i) {
            if (!s_used[i]) {
                drop(child(sp, sf[i].name));
            }
        }
    }

    void unmatched_target(const Field& t, const FieldPath& path) {
        if (t.default_value) {
            body_.push_back(cmd::Default{path, untyped(*t.default_value)});
        } else if (t.optional) {
            auto zero = natural_zero(t.type);
            bool scalar = t.type.kind != TypeKind::Enum && t.type.kind != TypeKind::Object;
            body_.push_back(cmd::Add{path, scalar && zero ? *zero : Value{}});
        } else {
            missing(path, "no source field corresponds to '" + path.str() + "'");
        }
    }

    void missing(const FieldPath& path, std::string reason) {
        body_.push_back(cmd::Missing{path, std::move(reason)});
    }

    std::vector<std::pair<std::string, std::string>> link_table(const FieldType& s, const FieldType& t) const {
        std::vector<Scored> scored;
        auto lower = [](std::string v) {
            for (char& c : v) {
                c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            }
            return v;
        };
        for (std::size_t i = 0; i < s.variants.size(); ++i) {
            for (std::size_t j = 0; j < t.variants.size(); ++j) {
                double score = lower(s.variants[i]) == lower(t.variants[j])
                                   ? 1.0
                                   : name_similarity(s.variants[i], t.variants[j]);
                if (score >= config_.similarity_threshold) {
                    scored.push_back({score, i, j});
                }
            }
        }
        std::sort(scored.begin(), scored.end(), [&](const Scored& a, const Scored& b) {
            if (a.score != b.score) {
                return a.score > b.score;
            }
            return std::tie(s.variants[a.i], t.variants[a.j]) < std::tie(s.variants[b.i], t.variants[b.j]);
        });
        std::vector<std::optional<std::size_t>> chosen(s.variants.size());
        std::vector<bool> t_used(t.variants.size(), false);
        for (const auto& c : scored) {
            if (!chosen[c.i] && !t_used[c.j]) {
                chosen[c.i] = c.j;
                t_used[c.j] = true;
            }
        }
        std::vector<std::pair<std::string, std::string>> table;
        for (std::size_t i = 0; i < s.variants.size(); ++i) {
            if (chosen[i]) {
                table.emplace_back(s.variants[i], t.variants[*chosen[i]]);
            }
        }
        return table;
    }

    void pair(const Field& s, const FieldPath& sp, const Field& t, const FieldPath& tp) {
        const bool need_default = source_.nullable(sp) && !t.optional;
        std::optional<Value> fill;
        if (need_default) {
            fill = t.default_value ? std::optional(untyped(*t.default_value)) : natural_zero(t.type);
            if (!fill) {
                missing(tp, "source '" + sp.str() + "' may be null and target '" + tp.str() + "' has no fallback");
                drop(sp);
                return;
            }
        }
        const bool same_name = s.name == t.name;
        if (auto symbol = flag_symbol(s, t)) {
            auto other = std::find_if(t.type.variants.begin(), t.type.variants.end(),
                                      [&](const std::string& v) { return v != *symbol; });
            auto text = [](const std::string& v) {
                return std::make_shared<const Expr>(Expr{ast::Literal{Value{v}}});
            };
            auto value = std::make_shared<const Expr>(Expr{ast::ValueRef{}});
            auto expr = std::make_shared<const Expr>(Expr{ast::Call{"if", {value, text(*symbol), text(*other)}}});
            body_.push_back(cmd::Apply{sp, tp, "", expr});
            if (fill) {
                body_.push_back(cmd::Default{tp, *fill});
            }
            return;
        }
        if (s.type.kind == TypeKind::Object && t.type.kind == TypeKind::Object) {
            if (assignable(s.type, t.type, false)) {
                body_.push_back(same_name ? StlCommand{cmd::Copy{sp, tp}} : StlCommand{cmd::Rename{sp, tp}});
            } else {
                plan_level(s.type.fields, sp, t.type.fields, tp);
            }
            return;
        }
        std::vector<std::pair<std::string, std::string>> table;
        if (s.type.kind == TypeKind::Enum && t.type.kind == TypeKind::Enum && !subset(s.type.variants, t.type.variants)) {
            table = link_table(s.type, t.type);
            if (table.empty()) {
                missing(tp, "no variant of '" + sp.str() + "' corresponds to a variant of '" + tp.str() + "'");
                drop(sp);
                return;
            }
        }
        std::optional<UnitConversion> conv;
        if (s.unit && t.unit) {
            conv = infer_unit_conversion(*s.unit, *t.unit);
            if (conv && conv->factor == 1.0 && conv->offset == 0.0) {
                conv.reset();
            }
        }
        if (conv && t.type.kind == TypeKind::Integer &&
            (std::trunc(conv->factor) != conv->factor || std::trunc(conv->offset) != conv->offset)) {
            missing(tp, "converting " + conv->source_unit + " to " + conv->target_unit +
                            " cannot be exact for integer target '" + tp.str() + "'");
            drop(sp);
            return;
        }
        if (conv && conv->offset != 0.0 && config_.prefer_gen && is_numeric(s.type.kind)) {
            std::string name = "conv_";
            for (const auto& seg : sp.segments) name += seg + "_";
            name += "to";
            for (const auto& seg : tp.segments) name += "_" + seg;
            auto lit = [](double d) { return std::make_shared<const Expr>(Expr{ast::Literal{Value{d}}}); };
            auto value = std::make_shared<const Expr>(Expr{ast::ValueRef{}});
            auto mul = std::make_shared<const Expr>(Expr{ast::Binary{BinaryOp::Mul, value, lit(conv->factor)}});
            auto add = std::make_shared<const Expr>(Expr{ast::Binary{BinaryOp::Add, mul, lit(conv->offset)}});
            body_.push_back(cmd::Gen{name, add});
            body_.push_back(cmd::Apply{sp, tp, name, nullptr});
        } else {
            bool widening = s.type.kind == TypeKind::Integer && t.type.kind == TypeKind::Float;
            if (s.type.kind == t.type.kind || widening) {
                body_.push_back(same_name ? StlCommand{cmd::Copy{sp, tp}} : StlCommand{cmd::Rename{sp, tp}});
            } else {
                body_.push_back(cmd::Cast{sp, tp, t.type});
            }
            if (conv && conv->factor != 1.0) {
                body_.push_back(cmd::Scale{tp, conv->factor});
            }
            if (conv && conv->offset != 0.0) {
                body_.push_back(cmd::Shift{tp, conv->offset});
            }
        }
        if (!table.empty()) {
            body_.push_back(cmd::Link{tp, std::move(table), std::nullopt});
        }
        if (fill) {
            body_.push_back(cmd::Default{tp, *fill});
        }
    }

    const Schema& source_;
    const Schema& target_;
    const PlannerConfig& config_;
    std::vector<FieldPath> ranks_;
    std::vector<StlCommand> body_;
    std::vector<std::pair<std::size_t, StlCommand>> deletes_;
};

// ---- model engine --------------------------------------------------------

struct Conversion {
    StlProgram program;
    std::vector<Diagnostic> protocol;
    std::vector<std::string> violations;
};

Conversion convert(const std::vector<ToolInvocation>& calls, const Schema& source, const Schema& target) {
    Conversion out;
    out.program.source = SchemaRef{source.subject, source.version};
    out.program.target = SchemaRef{target.subject, target.version};
    bool have_match = false;
    std::set<std::string> gen_names;
    for (std::size_t i = 0; i < calls.size(); ++i) {
        const auto& call = calls[i];
        const std::string where = "tool call " + std::to_string(i + 1) + " (" + call.name + ")";
        auto violation = [&](const std::string& message) {
            out.violations.push_back(where + ": " + message);
            out.protocol.push_back(Diagnostic{"protocol", where + ": " + message, std::nullopt, std::nullopt});
        };
        const auto& catalog = stl_tool_catalog();
        bool known = std::any_of(catalog.begin(), catalog.end(), [&](const ToolSpec& t) { return t.name == call.name; });
        if (!known) {
            violation("unknown tool '" + call.name + "'");
            continue;
        }
        try {
            if (call.name == "match") {
                cmd::Match m = match_from_document(call.arguments);
                if (have_match) {
                    out.protocol.push_back(Diagnostic{"protocol", where + ": MATCH repeated; the first one is kept",
                                                      std::nullopt, std::nullopt});
                } else {
                    out.program.match = std::move(m);
                    have_match = true;
                }
                continue;
            }
            StlCommand command = command_from_document(call.name, call.arguments);
            if (auto* gen = std::get_if<cmd::Gen>(&command); gen != nullptr && !gen_names.insert(gen->name).second) {
                violation("duplicate GEN name '" + gen->name + "'");
                continue;
            }
            out.program.commands.push_back(std::move(command));
        } catch (const ParseError& e) {
            violation("malformed arguments: " + e.detail());
        }
    }
    if (!have_match) {
        out.program.match = cmd::Match{false, "no MATCH produced"};
        out.protocol.insert(out.protocol.begin(), Diagnostic{"protocol", "no MATCH produced", std::nullopt, std::nullopt});
    }
    return out;
}

}  // namespace

std::string_view to_string(Engine engine) noexcept {
    switch (engine) {
        case Engine::Model: return "model";
        case Engine::Heuristic: return "heuristic";
        case Engine::Manual: return "manual";
    }
    return "heuristic";
}

std::optional<Engine> parse_engine(std::string_view name) noexcept {
    if (name == "model") return Engine::Model;
    if (name == "heuristic") return Engine::Heuristic;
    if (name == "manual") return Engine::Manual;
    return std::nullopt;
}

void PlannerConfig::check() const {
    if (repair_rounds < 0 || repair_rounds > 5) {
        throw std::invalid_argument("repair_rounds must be within 0..5");
    }
    if (!(similarity_threshold >= 0.0 && similarity_threshold <= 1.0)) {
        throw std::invalid_argument("similarity_threshold must be within [0, 1]");
    }
}

std::vector<std::string> name_tokens(std::string_view name) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&]() {
        if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    };
    for (std::size_t i = 0; i < name.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(name[i]);
        if (!std::isalnum(c)) {
            flush();
            continue;
        }
        if (!current.empty()) {
            unsigned char prev = static_cast<unsigned char>(name[i - 1]);
            bool boundary = (std::isdigit(c) != 0) != (std::isdigit(prev) != 0);
            if (std::isupper(c) && std::islower(prev)) {
                boundary = true;
            }
            if (std::isupper(c) && std::isupper(prev) && i + 1 < name.size() &&
                std::islower(static_cast<unsigned char>(name[i + 1]))) {
                boundary = true;
            }
            if (boundary) {
                flush();
            }
        }
        current += static_cast<char>(std::tolower(c));
    }
    flush();
    return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        row[j] = j;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::set<std::string> sa(a.begin(), a.end());
    std::set<std::string> sb(b.begin(), b.end());
    if (sa.empty() && sb.empty()) {
        return 1.0;
    }
    std::size_t common = 0;
    for (const auto& t : sa) {
        common += sb.count(t);
    }
    return static_cast<double>(common) / static_cast<double>(sa.size() + sb.size() - common);
}

double name_similarity(std::string_view a, std::string_view b) {
    auto ta = name_tokens(a);
    auto tb = name_tokens(b);
    auto join = [](const std::vector<std::string>& tokens) {
        std::string out;
        for (const auto& t : tokens) {
            if (!out.empty()) {
                out += '_';
            }
            out += t;
        }
        return out;
    };
    std::string ja = join(ta);
    std::string jb = join(tb);
    std::size_t longest = std::max(ja.size(), jb.size());
    double lev = longest == 0 ? 0.0 : static_cast<double>(levenshtein(ja, jb)) / static_cast<double>(longest);
    return 0.5 * jaccard(ta, tb) + 0.5 * (1.0 - lev);
}

double entity_similarity(const Schema& source, const Schema& target) {
    auto tokens = [](const Schema& s) {
        auto out = text_tokens(s.subject);
        if (s.doc) {
            auto more = text_tokens(*s.doc);
            out.insert(out.end(), more.begin(), more.end());
        }
        return out;
    };
    return jaccard(tokens(source), tokens(target));
}

StlProgram plan_heuristic(const Schema& source, const Schema& target, const PlannerConfig& config) {
    config.check();
    HeuristicPlanner planner(source, target, config);
    return planner.run();
}

std::string planner_prompt(const Schema& source, const Schema& target) {
    std::string out;
    out += "Produce a mapping that converts records written with the SOURCE schema into records of the TARGET "
           "schema. Answer only with tool calls, in execution order.\n";
    out += "Rules: call match first. Every target field needs exactly one producing command (copy, rename, cast, "
           "add, default, apply or missing). Every source field must be consumed by copy, rename, cast, apply or "
           "delete. scale, shift and link act on a target field after its producer. Use missing when no source "
           "data fits; never guess.\n\n";
    out += "SOURCE schema:\n" + serialize_schema(source) + "\n";
    out += "TARGET schema:\n" + serialize_schema(target);
    return out;
}

PlanResult plan_with_model(ModelClient& client, const Schema& source, const Schema& target,
                           const PlannerConfig& config) {
    config.check();
    const std::string base = planner_prompt(source, target);
    std::string prompt = base;
    for (int round = 0;; ++round) {
        Conversion conv = convert(client.submit(prompt, stl_tool_catalog()), source, target);
        std::vector<Diagnostic> diagnostics = conv.protocol;
        auto found = validate_program(conv.program, source, target);
        diagnostics.insert(diagnostics.end(), found.begin(), found.end());
        if (diagnostics.empty()) {
            return PlanResult{std::move(conv.program), {}, round};
        }
        if (round >= config.repair_rounds) {
            if (!conv.violations.empty()) {
                std::string message = "model broke the tool-call protocol:";
                for (const auto& v : conv.violations) {
                    message += "\n  " + v;
                }
                throw ProtocolError(message);
            }
            return PlanResult{std::move(conv.program), std::move(diagnostics), round};
        }
        prompt = base + "\nYour previous answer was rejected. Diagnostics:\n";
        for (const auto& d : diagnostics) {
            prompt += format_diagnostic(d) + "\n";
        }
        prompt += "Answer again with the complete corrected list of tool calls.\n";
    }
}

}  // namespace gse
