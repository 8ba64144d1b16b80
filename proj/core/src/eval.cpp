#include "gse/eval.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gse/error.hpp"
#include "gse/model_client.hpp"

namespace gse {

namespace {

bool close(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

bool values_match(const Value& a, const Value& b) {
    bool a_num = a.kind() == ValueKind::Integer || a.kind() == ValueKind::Float;
    bool b_num = b.kind() == ValueKind::Integer || b.kind() == ValueKind::Float;
    if (a_num && b_num) {
        auto as_double = [](const Value& v) {
            return v.kind() == ValueKind::Integer ? static_cast<double>(v.as_int()) : v.as_float();
        };
        return close(as_double(a), as_double(b));
    }
    return a == b;
}

bool exprs_match(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) {
        return a == b;
    }
    return print_expr(*a) == print_expr(*b);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

EvalResult make_result(std::size_t tp, std::size_t fp, std::size_t fn) {
    EvalResult r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    r.recall = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    r.f1 = f1_score(r.precision, r.recall);
    return r;
}

double f1_score(double precision, double recall) {
    return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

bool commands_match(const StlCommand& predicted, const StlCommand& gold) {
    if (predicted.index() != gold.index()) {
        return false;
    }
    return std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            const auto& g = std::get<T>(gold);
            if constexpr (std::is_same_v<T, cmd::Add> || std::is_same_v<T, cmd::Default>) {
                return p.target == g.target && values_match(p.value, g.value);
            } else if constexpr (std::is_same_v<T, cmd::Scale>) {
                return p.target == g.target && close(p.factor, g.factor);
            } else if constexpr (std::is_same_v<T, cmd::Shift>) {
                return p.target == g.target && close(p.offset, g.offset);
            } else if constexpr (std::is_same_v<T, cmd::Link>) {
                std::map<std::string, std::string> pt(p.table.begin(), p.table.end());
                std::map<std::string, std::string> gt(g.table.begin(), g.table.end());
                return p.target == g.target && pt == gt && p.fallback == g.fallback;
            } else if constexpr (std::is_same_v<T, cmd::Gen>) {
                return p.name == g.name && exprs_match(p.expr, g.expr);
            } else if constexpr (std::is_same_v<T, cmd::Apply>) {
                return p.source == g.source && p.target == g.target && p.name == g.name &&
                       exprs_match(p.expr, g.expr);
            } else if constexpr (std::is_same_v<T, cmd::Missing>) {
                return p.target == g.target;
            } else {
                return p == g;
            }
        },
        predicted);
}

EvalResult score_program(const StlProgram& predicted, const StlProgram& gold) {
    std::vector<bool> claimed(predicted.commands.size(), false);
    std::size_t tp = 0;
    for (const auto& g : gold.commands) {
        for (std::size_t i = 0; i < predicted.commands.size(); ++i) {
            if (!claimed[i] && commands_match(predicted.commands[i], g)) {
                claimed[i] = true;
                ++tp;
                break;
            }
        }
    }
    return make_result(tp, predicted.commands.size() - tp, gold.commands.size() - tp);
}

std::vector<GoldCase> load_corpus(const std::filesystem::path& dir) {
    Document manifest = parse_document(read_text(dir / "corpus.yaml"));
    if (!manifest.is_object() || !manifest.contains("cases") || !manifest.at("cases").is_array()) {
        throw ParseError("corpus.yaml: expected a 'cases' list");
    }
    std::vector<GoldCase> out;
    for (const auto& entry : manifest.at("cases")) {
        auto path_of = [&](const char* key) {
            if (!entry.is_object() || !entry.contains(key) || !entry.at(key).is_string()) {
                throw ParseError(std::string("corpus.yaml: each case needs a string '") + key + "'");
            }
            return dir / entry.at(key).get<std::string>();
        };
        GoldCase c;
        c.name = entry.contains("name") && entry.at("name").is_string() ? entry.at("name").get<std::string>()
                                                                         : "case " + std::to_string(out.size() + 1);
        c.source = parse_schema(read_text(path_of("source")));
        c.target = parse_schema(read_text(path_of("target")));
        c.gold = parse_program(read_text(path_of("gold")));
        if (entry.contains("transcript")) {
            c.transcript = path_of("transcript");
        }
        out.push_back(std::move(c));
    }
    return out;
}

CorpusReport evaluate_corpus(const std::vector<GoldCase>& cases, const PlannerConfig& config,
                             const ClientFactory& client_factory) {
    if (cases.empty()) {
        throw std::invalid_argument("empty corpus");
    }
    config.check();
    CorpusReport report;
    double sum = 0.0;
    for (const auto& c : cases) {
        CaseScore score;
        score.name = c.name;
        auto start = std::chrono::steady_clock::now();
        try {
            StlProgram predicted;
            switch (config.engine) {
                case Engine::Heuristic: predicted = plan_heuristic(c.source, c.target, config); break;
                case Engine::Manual: predicted = c.gold; break;
                case Engine::Model: {
                    std::unique_ptr<ModelClient> client;
                    if (client_factory) {
                        client = client_factory(c);
                    } else if (c.transcript) {
                        client = std::make_unique<ScriptedModelClient>(ScriptedModelClient::from_file(*c.transcript));
                    } else {
                        client = std::make_unique<HttpModelClient>(HttpModelClient::from_env());
                    }
                    predicted = plan_with_model(*client, c.source, c.target, config).program;
                    break;
                }
            }
            score.result = score_program(predicted, c.gold);
        } catch (const std::exception& e) {
            score.error = e.what();
            score.result = make_result(0, 0, c.gold.commands.size());
            score.result.f1 = 0.0;
        }
        score.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        sum += score.result.f1;
        report.cases.push_back(std::move(score));
    }
    report.macro_f1 = sum / static_cast<double>(report.cases.size());
    return report;
}

std::string format_report(const CorpusReport& report) {
    std::size_t width = 5;
    for (const auto& c : report.cases) {
        width = std::max(width, c.name.size());
    }
    auto row = [&](const std::string& name, const std::string& p, const std::string& r, const std::string& f) {
        std::string out = name + std::string(width - name.size() + 2, ' ');
        char buf[64];
        std::snprintf(buf, sizeof buf, "%9s  %9s  %6s\n", p.c_str(), r.c_str(), f.c_str());
        return out + buf;
    };
    auto num = [](double v) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    std::string out = row("case", "precision", "recall", "f1");
    for (const auto& c : report.cases) {
        out += row(c.name, num(c.result.precision), num(c.result.recall), num(c.result.f1));
        if (c.error) {
            out += "  error: " + *c.error + "\n";
        }
    }
    out += row("macro", "", "", num(report.macro_f1));
    return out;
}

}  // namespace gse
