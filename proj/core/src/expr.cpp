#include "gse/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "gse/error.hpp"
#include "gse/interpreter.hpp"

namespace gse {

namespace {

constexpr std::size_t kVariadic = std::numeric_limits<std::size_t>::max();

constexpr std::array kBuiltins = {
    BuiltinInfo{"if", 3, 3, Dialect::Transform},
    BuiltinInfo{"round", 1, 1, Dialect::Transform},
    BuiltinInfo{"floor", 1, 1, Dialect::Transform},
    BuiltinInfo{"ceil", 1, 1, Dialect::Transform},
    BuiltinInfo{"abs", 1, 1, Dialect::Transform},
    BuiltinInfo{"min", 2, kVariadic, Dialect::Transform},
    BuiltinInfo{"max", 2, kVariadic, Dialect::Transform},
    BuiltinInfo{"concat", 2, kVariadic, Dialect::Transform},
    BuiltinInfo{"lower", 1, 1, Dialect::Transform},
    BuiltinInfo{"upper", 1, 1, Dialect::Transform},
    BuiltinInfo{"substr", 3, 3, Dialect::Transform},
    BuiltinInfo{"to_string", 1, 1, Dialect::Transform},
    BuiltinInfo{"to_number", 1, 1, Dialect::Transform},
    BuiltinInfo{"to_boolean", 1, 1, Dialect::Transform},
    BuiltinInfo{"cast", 2, kVariadic, Dialect::Pipeline},
    BuiltinInfo{"scale", 2, 2, Dialect::Pipeline},
    BuiltinInfo{"shift", 2, 2, Dialect::Pipeline},
    BuiltinInfo{"link", 3, kVariadic, Dialect::Pipeline},
    BuiltinInfo{"link_or", 4, kVariadic, Dialect::Pipeline},
    BuiltinInfo{"coalesce", 2, 2, Dialect::Pipeline},
    BuiltinInfo{"bind", 2, 2, Dialect::Pipeline},
    BuiltinInfo{"seq", 1, kVariadic, Dialect::Pipeline},
    BuiltinInfo{"fail_abort", 1, 1, Dialect::Pipeline},
    BuiltinInfo{"fail_mapping", 1, 1, Dialect::Pipeline},
};

ExprPtr make(decltype(Expr::node) node) {
    return std::make_shared<const Expr>(Expr{std::move(node)});
}

// ---- lexer ---------------------------------------------------------------

enum class Tok { Int, Float, String, Ident, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t pos = 0;
    std::uint64_t magnitude = 0;  // Int tokens: unsigned magnitude
    double number = 0;            // Float tokens
};

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            Token t;
            t.pos = pos_;
            if (pos_ >= text_.size()) {
                out.push_back(t);
                return out;
            }
            char c = text_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
                out.push_back(number());
            } else if (c == '"' || c == '\'') {
                out.push_back(string(c));
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t start = pos_;
                while (pos_ < text_.size() &&
                       (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                    ++pos_;
                }
                t.kind = Tok::Ident;
                t.text = std::string(text_.substr(start, pos_ - start));
                out.push_back(t);
            } else {
                static const std::array<std::string_view, 6> two = {"==", "!=", "<=", ">=", "&&", "||"};
                std::string_view rest = text_.substr(pos_);
                bool matched = false;
                for (auto op : two) {
                    if (rest.substr(0, 2) == op) {
                        if (op == "&&" || op == "||") {
                            fail("use 'and'/'or' instead of '" + std::string(op) + "'");
                        }
                        t.kind = Tok::Punct;
                        t.text = std::string(op);
                        pos_ += 2;
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    static const std::string_view singles = "+-*/%<>(),.{}:";
                    if (singles.find(c) == std::string_view::npos) {
                        fail(std::string("unexpected character '") + c + "'");
                    }
                    t.kind = Tok::Punct;
                    t.text = std::string(1, c);
                    ++pos_;
                }
                out.push_back(t);
            }
        }
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError("expression: " + message + " at offset " + std::to_string(pos_));
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    Token number() {
        Token t;
        t.pos = pos_;
        std::size_t start = pos_;
        bool is_float = false;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        if (pos_ < text_.size() && text_[pos_] == '.') {
            is_float = true;
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            }
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
                ++pos_;
            }
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                is_float = true;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                    ++pos_;
                }
            } else {
                pos_ = save;
            }
        }
        t.text = std::string(text_.substr(start, pos_ - start));
        const char* b = t.text.data();
        const char* e = b + t.text.size();
        if (is_float) {
            t.kind = Tok::Float;
            auto [ptr, ec] = std::from_chars(b, e, t.number);
            if (ec != std::errc{} || ptr != e || !std::isfinite(t.number)) {
                fail("invalid number '" + t.text + "'");
            }
        } else {
            t.kind = Tok::Int;
            auto [ptr, ec] = std::from_chars(b, e, t.magnitude);
            if (ec != std::errc{} || ptr != e) {
                fail("integer literal out of range '" + t.text + "'");
            }
        }
        return t;
    }

    Token string(char quote) {
        Token t;
        t.pos = pos_;
        t.kind = Tok::String;
        ++pos_;
        while (true) {
            if (pos_ >= text_.size()) {
                fail("unterminated string");
            }
            char c = text_[pos_++];
            if (c == quote) {
                return t;
            }
            if (c != '\\') {
                t.text += c;
                continue;
            }
            if (pos_ >= text_.size()) {
                fail("unterminated escape");
            }
            char esc = text_[pos_++];
            switch (esc) {
                case '\\': t.text += '\\'; break;
                case '"': t.text += '"'; break;
                case '\'': t.text += '\''; break;
                case 'n': t.text += '\n'; break;
                case 't': t.text += '\t'; break;
                case 'r': t.text += '\r'; break;
                case 'u': {
                    if (pos_ + 4 > text_.size()) {
                        fail("truncated \\u escape");
                    }
                    std::uint32_t cp = 0;
                    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + pos_ + 4, cp, 16);
                    if (ec != std::errc{} || ptr != text_.data() + pos_ + 4 || (cp >= 0xD800 && cp <= 0xDFFF)) {
                        fail("invalid \\u escape");
                    }
                    pos_ += 4;
                    append_utf8(t.text, cp);
                    break;
                }
                default: fail(std::string("unknown escape '\\") + esc + "'");
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

// ---- parser --------------------------------------------------------------

class Parser {
public:
    Parser(std::vector<Token> tokens, Dialect dialect) : tokens_(std::move(tokens)), dialect_(dialect) {}

    ExprPtr parse() {
        ExprPtr e = parse_or();
        if (peek().kind != Tok::End) {
            fail("unexpected '" + peek().text + "'");
        }
        return e;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
    }
    const Token& next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

    bool at_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }
    bool at_word(std::string_view w) const { return peek().kind == Tok::Ident && peek().text == w; }

    void expect_punct(std::string_view p) {
        if (!at_punct(p)) {
            fail("expected '" + std::string(p) + "'" +
                 (peek().kind == Tok::End ? " at end of input" : " before '" + peek().text + "'"));
        }
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError("expression: " + message + " at offset " + std::to_string(peek().pos));
    }

    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (at_word("or")) {
            ++pos_;
            lhs = make(ast::Binary{BinaryOp::Or, lhs, parse_and()});
        }
        return lhs;
    }

    ExprPtr parse_and() {
        ExprPtr lhs = parse_not();
        while (at_word("and")) {
            ++pos_;
            lhs = make(ast::Binary{BinaryOp::And, lhs, parse_not()});
        }
        return lhs;
    }

    ExprPtr parse_not() {
        if (at_word("not")) {
            ++pos_;
            return make(ast::Unary{UnaryOp::Not, parse_not()});
        }
        return parse_cmp();
    }

    ExprPtr parse_cmp() {
        ExprPtr lhs = parse_add();
        while (peek().kind == Tok::Punct) {
            const std::string& t = peek().text;
            BinaryOp op;
            if (t == "==") op = BinaryOp::Eq;
            else if (t == "!=") op = BinaryOp::Ne;
            else if (t == "<") op = BinaryOp::Lt;
            else if (t == "<=") op = BinaryOp::Le;
            else if (t == ">") op = BinaryOp::Gt;
            else if (t == ">=") op = BinaryOp::Ge;
            else break;
            ++pos_;
            lhs = make(ast::Binary{op, lhs, parse_add()});
        }
        return lhs;
    }

    ExprPtr parse_add() {
        ExprPtr lhs = parse_mul();
        while (at_punct("+") || at_punct("-")) {
            BinaryOp op = next().text == "+" ? BinaryOp::Add : BinaryOp::Sub;
            lhs = make(ast::Binary{op, lhs, parse_mul()});
        }
        return lhs;
    }

    ExprPtr parse_mul() {
        ExprPtr lhs = parse_unary();
        while (at_punct("*") || at_punct("/") || at_punct("%")) {
            const std::string& t = next().text;
            BinaryOp op = t == "*" ? BinaryOp::Mul : t == "/" ? BinaryOp::Div : BinaryOp::Mod;
            lhs = make(ast::Binary{op, lhs, parse_unary()});
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (at_punct("-")) {
            ++pos_;
            if (peek().kind == Tok::Int) {
                const Token& t = next();
                constexpr std::uint64_t limit = static_cast<std::uint64_t>(INT64_MAX) + 1;
                if (t.magnitude > limit) {
                    fail("integer literal out of range '-" + t.text + "'");
                }
                std::int64_t v = t.magnitude == limit ? INT64_MIN : -static_cast<std::int64_t>(t.magnitude);
                return make(ast::Literal{Value{v}});
            }
            if (peek().kind == Tok::Float) {
                return make(ast::Literal{Value{-next().number}});
            }
            return make(ast::Unary{UnaryOp::Neg, parse_unary()});
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Int: {
                ++pos_;
                if (t.magnitude > static_cast<std::uint64_t>(INT64_MAX)) {
                    fail("integer literal out of range '" + t.text + "'");
                }
                return make(ast::Literal{Value{static_cast<std::int64_t>(t.magnitude)}});
            }
            case Tok::Float: ++pos_; return make(ast::Literal{Value{t.number}});
            case Tok::String: ++pos_; return make(ast::Literal{Value{t.text}});
            case Tok::Punct:
                if (t.text == "(") {
                    ++pos_;
                    ExprPtr inner = parse_or();
                    expect_punct(")");
                    return inner;
                }
                if (t.text == "{") {
                    if (dialect_ != Dialect::Pipeline) {
                        fail("record constructors are not available in transform expressions");
                    }
                    return parse_record();
                }
                fail("unexpected '" + t.text + "'");
            case Tok::End: fail("unexpected end of input");
            case Tok::Ident: break;
        }
        const std::string word = t.text;
        ++pos_;
        if (word == "true") return make(ast::Literal{Value{true}});
        if (word == "false") return make(ast::Literal{Value{false}});
        if (word == "null") {
            if (dialect_ != Dialect::Pipeline) {
                fail("'null' is not available in transform expressions");
            }
            return make(ast::Literal{Value{}});
        }
        if (word == "value") return make(ast::ValueRef{});
        if (word == "src") {
            expect_punct(".");
            FieldPath path;
            while (true) {
                if (peek().kind != Tok::Ident) {
                    fail("expected field name after 'src.'");
                }
                path.segments.push_back(next().text);
                if (!at_punct(".")) {
                    break;
                }
                ++pos_;
            }
            return make(ast::SourceRef{std::move(path)});
        }
        if (word == "and" || word == "or" || word == "not") {
            fail("unexpected '" + word + "'");
        }
        if (!at_punct("(")) {
            fail("unknown identifier '" + word + "'");
        }
        const BuiltinInfo* info = find_builtin(word, dialect_);
        if (info == nullptr) {
            fail("unknown function '" + word + "'");
        }
        ++pos_;
        std::vector<ExprPtr> args;
        if (!at_punct(")")) {
            while (true) {
                args.push_back(parse_or());
                if (!at_punct(",")) {
                    break;
                }
                ++pos_;
            }
        }
        expect_punct(")");
        if (args.size() < info->min_arity || args.size() > info->max_arity) {
            std::string expected = info->min_arity == info->max_arity ? std::to_string(info->min_arity)
                                   : info->max_arity == kVariadic     ? "at least " + std::to_string(info->min_arity)
                                                                      : std::to_string(info->min_arity) + ".." +
                                                                            std::to_string(info->max_arity);
            fail("wrong arity for '" + word + "': expected " + expected + " argument(s), got " +
                 std::to_string(args.size()));
        }
        return make(ast::Call{word, std::move(args)});
    }

    ExprPtr parse_record() {
        expect_punct("{");
        ast::Record record;
        if (!at_punct("}")) {
            while (true) {
                std::string key;
                if (peek().kind == Tok::Ident || peek().kind == Tok::String) {
                    key = next().text;
                } else {
                    fail("expected field name in record constructor");
                }
                expect_punct(":");
                record.fields.emplace_back(std::move(key), parse_or());
                if (!at_punct(",")) {
                    break;
                }
                ++pos_;
            }
        }
        expect_punct("}");
        return make(std::move(record));
    }

    std::vector<Token> tokens_;
    Dialect dialect_;
    std::size_t pos_ = 0;
};

// ---- printer -------------------------------------------------------------

int precedence(BinaryOp op) {
    switch (op) {
        case BinaryOp::Or: return 1;
        case BinaryOp::And: return 2;
        case BinaryOp::Eq:
        case BinaryOp::Ne:
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge: return 4;
        case BinaryOp::Add:
        case BinaryOp::Sub: return 5;
        case BinaryOp::Mul:
        case BinaryOp::Div:
        case BinaryOp::Mod: return 6;
    }
    return 1;
}

constexpr int kNotPrec = 3;
constexpr int kNegPrec = 7;
constexpr int kAtomPrec = 8;

std::string_view op_text(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Mod: return "%";
        case BinaryOp::Eq: return "==";
        case BinaryOp::Ne: return "!=";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
        case BinaryOp::And: return "and";
        case BinaryOp::Or: return "or";
    }
    return "?";
}

std::string quote_string(const std::string& s) {
    std::string out = "\"";
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (c < 0x20 || c == 0x7f) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    return out + "\"";
}

std::string literal_text(const Value& v) {
    switch (v.kind()) {
        case ValueKind::Null: return "null";
        case ValueKind::Boolean: return v.as_bool() ? "true" : "false";
        case ValueKind::Integer: return std::to_string(v.as_int());
        case ValueKind::Float: return format_double(v.as_float());
        case ValueKind::String:
        case ValueKind::Enum: return quote_string(v.text());
        case ValueKind::Object: return to_display(v);
    }
    return "null";
}

bool is_numeric_literal(const Expr& e) {
    auto* lit = std::get_if<ast::Literal>(&e.node);
    return lit != nullptr && lit->value.is_number();
}

int expr_precedence(const Expr& e) {
    if (auto* b = std::get_if<ast::Binary>(&e.node)) {
        return precedence(b->op);
    }
    if (auto* u = std::get_if<ast::Unary>(&e.node)) {
        return u->op == UnaryOp::Not ? kNotPrec : kNegPrec;
    }
    if (auto* lit = std::get_if<ast::Literal>(&e.node)) {
        // A negative literal prints with a leading minus.
        if (lit->value.is_number() && std::signbit(lit->value.to_double())) {
            return kNegPrec;
        }
    }
    return kAtomPrec;
}

void print(const Expr& e, int min_prec, PrintStyle style, std::string& out);

void print_operand(const Expr& e, int min_prec, PrintStyle style, std::string& out) {
    bool wrap = expr_precedence(e) < min_prec;
    if (style == PrintStyle::FullyParenthesized) {
        wrap = wrap || std::holds_alternative<ast::Binary>(e.node) || std::holds_alternative<ast::Unary>(e.node);
    }
    if (wrap) {
        out += '(';
        print(e, 0, style, out);
        out += ')';
    } else {
        print(e, min_prec, style, out);
    }
}

void print(const Expr& e, int min_prec, PrintStyle style, std::string& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, ast::Literal>) {
                out += literal_text(n.value);
            } else if constexpr (std::is_same_v<T, ast::ValueRef>) {
                out += "value";
            } else if constexpr (std::is_same_v<T, ast::SourceRef>) {
                out += "src." + n.path.str();
            } else if constexpr (std::is_same_v<T, ast::Unary>) {
                if (n.op == UnaryOp::Not) {
                    out += "not ";
                    print_operand(*n.operand, kNotPrec, style, out);
                } else {
                    out += '-';
                    if (is_numeric_literal(*n.operand)) {
                        out += '(';
                        print(*n.operand, 0, style, out);
                        out += ')';
                    } else {
                        print_operand(*n.operand, kNegPrec, style, out);
                    }
                }
            } else if constexpr (std::is_same_v<T, ast::Binary>) {
                int p = precedence(n.op);
                print_operand(*n.lhs, p, style, out);
                out += ' ';
                out += op_text(n.op);
                out += ' ';
                print_operand(*n.rhs, p + 1, style, out);
            } else if constexpr (std::is_same_v<T, ast::Call>) {
                out += n.name + "(";
                for (std::size_t i = 0; i < n.args.size(); ++i) {
                    if (i > 0) {
                        out += ", ";
                    }
                    print(*n.args[i], 0, style, out);
                }
                out += ')';
            } else if constexpr (std::is_same_v<T, ast::Record>) {
                out += '{';
                for (std::size_t i = 0; i < n.fields.size(); ++i) {
                    if (i > 0) {
                        out += ", ";
                    }
                    out += is_identifier(n.fields[i].first) ? n.fields[i].first : quote_string(n.fields[i].first);
                    out += ": ";
                    print(*n.fields[i].second, 0, style, out);
                }
                out += '}';
            }
        },
        e.node);
    (void)min_prec;
}

// ---- evaluation ----------------------------------------------------------

[[noreturn]] void eval_fail(const std::string& detail) {
    throw TransformError(TransformErrorKind::EvalError, detail);
}

std::string kind_name(const Value& v) {
    return std::string(to_string(v.kind()));
}

std::vector<std::string> code_points(const std::string& s) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < s.size();) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
        len = std::min(len, s.size() - i);
        out.push_back(s.substr(i, len));
        i += len;
    }
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::int64_t to_int_checked(double d, const char* fn) {
    if (!std::isfinite(d) || d < -9.2233720368547758e18 || d >= 9.2233720368547758e18) {
        eval_fail(std::string(fn) + ": result out of integer range");
    }
    return static_cast<std::int64_t>(d);
}

Value arithmetic(BinaryOp op, const Value& a, const Value& b) {
    if (!a.is_number() || !b.is_number()) {
        eval_fail("type mismatch: " + kind_name(a) + " " + std::string(op_text(op)) + " " + kind_name(b));
    }
    if (op == BinaryOp::Div) {
        double denom = b.to_double();
        if (denom == 0.0) {
            eval_fail("division by zero");
        }
        return Value{a.to_double() / denom};
    }
    if (a.kind() == ValueKind::Integer && b.kind() == ValueKind::Integer) {
        std::int64_t x = a.as_int();
        std::int64_t y = b.as_int();
        std::int64_t r = 0;
        bool overflow = false;
        switch (op) {
            case BinaryOp::Add: overflow = __builtin_add_overflow(x, y, &r); break;
            case BinaryOp::Sub: overflow = __builtin_sub_overflow(x, y, &r); break;
            case BinaryOp::Mul: overflow = __builtin_mul_overflow(x, y, &r); break;
            case BinaryOp::Mod:
                if (y == 0) {
                    eval_fail("modulo by zero");
                }
                r = (y == -1) ? 0 : x % y;
                break;
            default: break;
        }
        if (overflow) {
            eval_fail("integer overflow in '" + std::string(op_text(op)) + "'");
        }
        return Value{r};
    }
    double x = a.to_double();
    double y = b.to_double();
    switch (op) {
        case BinaryOp::Add: return Value{x + y};
        case BinaryOp::Sub: return Value{x - y};
        case BinaryOp::Mul: return Value{x * y};
        case BinaryOp::Mod:
            if (y == 0.0) {
                eval_fail("modulo by zero");
            }
            return Value{std::fmod(x, y)};
        default: break;
    }
    eval_fail("unsupported operator");
}

bool values_equal(const Value& a, const Value& b) {
    if (a.is_number() && b.is_number()) {
        if (a.kind() == ValueKind::Integer && b.kind() == ValueKind::Integer) {
            return a.as_int() == b.as_int();
        }
        return a.to_double() == b.to_double();
    }
    if (a.is_text() && b.is_text()) {
        return a.text() == b.text();
    }
    return a == b;
}

bool compare(BinaryOp op, const Value& a, const Value& b) {
    int cmp = 0;
    if (a.is_number() && b.is_number()) {
        if (a.kind() == ValueKind::Integer && b.kind() == ValueKind::Integer) {
            cmp = a.as_int() < b.as_int() ? -1 : a.as_int() > b.as_int() ? 1 : 0;
        } else {
            double x = a.to_double();
            double y = b.to_double();
            cmp = x < y ? -1 : x > y ? 1 : 0;
        }
    } else if (a.is_text() && b.is_text()) {
        int c = a.text().compare(b.text());
        cmp = c < 0 ? -1 : c > 0 ? 1 : 0;
    } else {
        eval_fail("cannot order " + kind_name(a) + " and " + kind_name(b));
    }
    switch (op) {
        case BinaryOp::Lt: return cmp < 0;
        case BinaryOp::Le: return cmp <= 0;
        case BinaryOp::Gt: return cmp > 0;
        case BinaryOp::Ge: return cmp >= 0;
        default: return false;
    }
}

bool expect_bool(const Value& v, const char* where) {
    if (v.kind() != ValueKind::Boolean) {
        eval_fail(std::string(where) + " expects a boolean, got " + kind_name(v));
    }
    return v.as_bool();
}

const std::string& expect_text(const Value& v, const std::string& fn) {
    if (!v.is_text()) {
        eval_fail(fn + " expects a string, got " + kind_name(v));
    }
    return v.text();
}

double expect_number(const Value& v, const std::string& fn) {
    if (!v.is_number()) {
        eval_fail(fn + " expects a number, got " + kind_name(v));
    }
    return v.to_double();
}

std::string ascii_case(std::string s, bool upper) {
    for (char& c : s) {
        unsigned char u = static_cast<unsigned char>(c);
        if (u < 0x80) {
            c = static_cast<char>(upper ? std::toupper(u) : std::tolower(u));
        }
    }
    return s;
}

class Evaluator {
public:
    Evaluator(const Value& source, const Schema* schema) : source_(source), schema_(schema) {}

    Value eval(const Expr& e, const Value& value) {
        return std::visit([&](const auto& n) { return eval_node(n, value); }, e.node);
    }

private:
    Value eval_node(const ast::Literal& n, const Value&) { return n.value; }
    Value eval_node(const ast::ValueRef&, const Value& value) { return value; }
    Value eval_node(const ast::SourceRef& n, const Value&) { return read_path(source_, n.path, schema_); }

    Value eval_node(const ast::Unary& n, const Value& value) {
        Value v = eval(*n.operand, value);
        if (n.op == UnaryOp::Not) {
            return Value{!expect_bool(v, "not")};
        }
        if (v.kind() == ValueKind::Integer) {
            if (v.as_int() == INT64_MIN) {
                eval_fail("integer overflow in negation");
            }
            return Value{-v.as_int()};
        }
        if (v.kind() == ValueKind::Float) {
            return Value{-v.as_float()};
        }
        eval_fail("cannot negate " + kind_name(v));
    }

    Value eval_node(const ast::Binary& n, const Value& value) {
        if (n.op == BinaryOp::And || n.op == BinaryOp::Or) {
            bool lhs = expect_bool(eval(*n.lhs, value), op_text(n.op).data());
            if (n.op == BinaryOp::And && !lhs) return Value{false};
            if (n.op == BinaryOp::Or && lhs) return Value{true};
            return Value{expect_bool(eval(*n.rhs, value), op_text(n.op).data())};
        }
        Value a = eval(*n.lhs, value);
        Value b = eval(*n.rhs, value);
        switch (n.op) {
            case BinaryOp::Eq: return Value{values_equal(a, b)};
            case BinaryOp::Ne: return Value{!values_equal(a, b)};
            case BinaryOp::Lt:
            case BinaryOp::Le:
            case BinaryOp::Gt:
            case BinaryOp::Ge: return Value{compare(n.op, a, b)};
            default: return arithmetic(n.op, a, b);
        }
    }

    Value eval_node(const ast::Record& n, const Value& value) {
        Object out;
        for (const auto& [key, expr] : n.fields) {
            out.set(key, eval(*expr, value));
        }
        return Value{std::move(out)};
    }

    Value eval_node(const ast::Call& n, const Value& value) {
        const std::string& fn = n.name;
        // Lazy forms first.
        if (fn == "if") {
            return expect_bool(eval(*n.args[0], value), "if") ? eval(*n.args[1], value) : eval(*n.args[2], value);
        }
        if (fn == "bind") {
            Value bound = eval(*n.args[0], value);
            if (bound.is_null()) {
                return bound;
            }
            return eval(*n.args[1], bound);
        }
        if (fn == "seq") {
            for (std::size_t i = 0; i + 1 < n.args.size(); ++i) {
                eval(*n.args[i], value);
            }
            return eval(*n.args.back(), value);
        }
        if (fn == "coalesce") {
            Value first = eval(*n.args[0], value);
            return first.is_null() ? eval(*n.args[1], value) : first;
        }
        std::vector<Value> args;
        args.reserve(n.args.size());
        for (const auto& a : n.args) {
            args.push_back(eval(*a, value));
        }
        return call(fn, args);
    }

    Value call(const std::string& fn, const std::vector<Value>& args) {
        if (fn == "round" || fn == "floor" || fn == "ceil") {
            const Value& x = args[0];
            if (x.kind() == ValueKind::Integer) {
                return x;
            }
            double d = expect_number(x, fn);
            double r = fn == "round" ? std::round(d) : fn == "floor" ? std::floor(d) : std::ceil(d);
            return Value{to_int_checked(r, fn.c_str())};
        }
        if (fn == "abs") {
            const Value& x = args[0];
            if (x.kind() == ValueKind::Integer) {
                if (x.as_int() == INT64_MIN) {
                    eval_fail("integer overflow in abs");
                }
                return Value{x.as_int() < 0 ? -x.as_int() : x.as_int()};
            }
            return Value{std::fabs(expect_number(x, fn))};
        }
        if (fn == "min" || fn == "max") {
            bool all_int = true;
            for (const auto& a : args) {
                expect_number(a, fn);
                all_int = all_int && a.kind() == ValueKind::Integer;
            }
            std::size_t best = 0;
            for (std::size_t i = 1; i < args.size(); ++i) {
                bool better = fn == "min" ? compare(BinaryOp::Lt, args[i], args[best])
                                          : compare(BinaryOp::Gt, args[i], args[best]);
                if (better) {
                    best = i;
                }
            }
            return all_int ? args[best] : Value{args[best].to_double()};
        }
        if (fn == "concat") {
            std::string out;
            for (const auto& a : args) {
                out += expect_text(a, fn);
            }
            return Value{std::move(out)};
        }
        if (fn == "lower" || fn == "upper") {
            return Value{ascii_case(expect_text(args[0], fn), fn == "upper")};
        }
        if (fn == "substr") {
            auto cps = code_points(expect_text(args[0], fn));
            if (args[1].kind() != ValueKind::Integer || args[2].kind() != ValueKind::Integer) {
                eval_fail("substr expects integer start and length");
            }
            std::int64_t start = args[1].as_int();
            std::int64_t length = args[2].as_int();
            if (start < 0 || length < 0) {
                eval_fail("substr start and length must be non-negative");
            }
            std::string out;
            for (std::int64_t i = start; i < static_cast<std::int64_t>(cps.size()) && i - start < length; ++i) {
                out += cps[static_cast<std::size_t>(i)];
            }
            return Value{std::move(out)};
        }
        if (fn == "to_string") {
            const Value& x = args[0];
            if (x.is_text()) {
                return Value{x.text()};
            }
            if (x.is_number() || x.kind() == ValueKind::Boolean) {
                return cast_value(x, FieldType::scalar(TypeKind::String));
            }
            eval_fail("to_string cannot convert " + kind_name(x));
        }
        if (fn == "to_number") {
            const Value& x = args[0];
            if (x.is_number()) {
                return x;
            }
            const std::string s = trim(expect_text(x, fn));
            std::int64_t i = 0;
            auto [ip, iec] = std::from_chars(s.data(), s.data() + s.size(), i);
            if (!s.empty() && iec == std::errc{} && ip == s.data() + s.size()) {
                return Value{i};
            }
            double d = 0;
            auto [dp, dec] = std::from_chars(s.data(), s.data() + s.size(), d);
            if (s.empty() || dec != std::errc{} || dp != s.data() + s.size() || !std::isfinite(d)) {
                eval_fail("to_number cannot parse '" + s + "'");
            }
            return Value{d};
        }
        if (fn == "to_boolean") {
            const Value& x = args[0];
            if (x.kind() == ValueKind::Boolean) {
                return x;
            }
            if (x.is_number()) {
                return Value{x.to_double() != 0.0};
            }
            std::string s = ascii_case(trim(expect_text(x, fn)), false);
            if (s == "true" || s == "1") return Value{true};
            if (s == "false" || s == "0") return Value{false};
            eval_fail("to_boolean cannot parse '" + x.text() + "'");
        }
        if (fn == "cast") {
            if (args[0].is_null()) {
                return args[0];
            }
            auto kind = parse_type_kind(expect_text(args[1], fn));
            if (!kind) {
                eval_fail("cast: unknown type '" + args[1].text() + "'");
            }
            FieldType type = FieldType::scalar(*kind);
            for (std::size_t i = 2; i < args.size(); ++i) {
                type.variants.push_back(expect_text(args[i], fn));
            }
            return cast_value(args[0], type);
        }
        if (fn == "scale" || fn == "shift") {
            if (args[0].is_null()) {
                return args[0];
            }
            double k = expect_number(args[1], fn);
            return fn == "scale" ? scale_number(args[0], k) : shift_number(args[0], k);
        }
        if (fn == "link" || fn == "link_or") {
            if (args[0].is_null()) {
                return args[0];
            }
            const std::string& symbol = expect_text(args[0], fn);
            std::size_t first = fn == "link" ? 1 : 2;
            for (std::size_t i = first; i + 1 < args.size(); i += 2) {
                if (expect_text(args[i], fn) == symbol) {
                    return Value{EnumSymbol{expect_text(args[i + 1], fn)}};
                }
            }
            if (fn == "link_or") {
                return Value{EnumSymbol{expect_text(args[1], fn)}};
            }
            eval_fail("LINK has no entry for '" + symbol + "' and no fallback");
        }
        if (fn == "fail_abort") {
            throw TransformError(TransformErrorKind::Abort, expect_text(args[0], fn));
        }
        if (fn == "fail_mapping") {
            const std::string& path = expect_text(args[0], fn);
            throw TransformError(TransformErrorKind::MappingFailure, "no mapping produces target '" + path + "'",
                                 path);
        }
        eval_fail("unknown function '" + fn + "'");
    }

    const Value& source_;
    const Schema* schema_;
};

}  // namespace

const BuiltinInfo* find_builtin(std::string_view name, Dialect dialect) {
    for (const auto& b : kBuiltins) {
        if (b.name == name) {
            if (b.dialect == Dialect::Pipeline && dialect != Dialect::Pipeline) {
                return nullptr;
            }
            return &b;
        }
    }
    return nullptr;
}

bool is_unary_builtin(std::string_view name) {
    const BuiltinInfo* b = find_builtin(name, Dialect::Transform);
    return b != nullptr && b->min_arity <= 1 && b->max_arity >= 1 && name != "if";
}

bool is_reserved_word(std::string_view name) {
    static constexpr std::array<std::string_view, 9> words = {"value", "src", "true", "false", "null",
                                                              "and",   "or",  "not",  "if"};
    return std::find(words.begin(), words.end(), name) != words.end();
}

ExprPtr parse_expr(std::string_view text, Dialect dialect) {
    Lexer lexer(text);
    Parser parser(lexer.run(), dialect);
    return parser.parse();
}

std::string print_expr(const Expr& expr, PrintStyle style) {
    std::string out;
    if (style == PrintStyle::FullyParenthesized) {
        print_operand(expr, 0, style, out);
    } else {
        print(expr, 0, style, out);
    }
    return out;
}

bool same_expr(const ExprPtr& lhs, const ExprPtr& rhs) {
    if (lhs == rhs) {
        return true;
    }
    if (!lhs || !rhs) {
        return false;
    }
    return *lhs == *rhs;
}

bool operator==(const Expr& lhs, const Expr& rhs) {
    if (lhs.node.index() != rhs.node.index()) {
        return false;
    }
    return std::visit(
        [&](const auto& a) -> bool {
            using T = std::decay_t<decltype(a)>;
            const T& b = std::get<T>(rhs.node);
            if constexpr (std::is_same_v<T, ast::Literal>) {
                return a.value == b.value;
            } else if constexpr (std::is_same_v<T, ast::ValueRef>) {
                return true;
            } else if constexpr (std::is_same_v<T, ast::SourceRef>) {
                return a.path == b.path;
            } else if constexpr (std::is_same_v<T, ast::Unary>) {
                return a.op == b.op && same_expr(a.operand, b.operand);
            } else if constexpr (std::is_same_v<T, ast::Binary>) {
                return a.op == b.op && same_expr(a.lhs, b.lhs) && same_expr(a.rhs, b.rhs);
            } else if constexpr (std::is_same_v<T, ast::Call>) {
                if (a.name != b.name || a.args.size() != b.args.size()) {
                    return false;
                }
                for (std::size_t i = 0; i < a.args.size(); ++i) {
                    if (!same_expr(a.args[i], b.args[i])) {
                        return false;
                    }
                }
                return true;
            } else {
                if (a.fields.size() != b.fields.size()) {
                    return false;
                }
                for (std::size_t i = 0; i < a.fields.size(); ++i) {
                    if (a.fields[i].first != b.fields[i].first ||
                        !same_expr(a.fields[i].second, b.fields[i].second)) {
                        return false;
                    }
                }
                return true;
            }
        },
        lhs.node);
}

Value eval_expr(const Expr& expr, const Value& value, const Value& source, const Schema* source_schema) {
    Evaluator evaluator(source, source_schema);
    return evaluator.eval(expr, value);
}

Value read_path(const Value& record, const FieldPath& path, const Schema* schema) {
    const Value* current = &record;
    const std::vector<Field>* level = schema != nullptr ? &schema->fields : nullptr;
    Value holder;
    for (std::size_t i = 0; i < path.segments.size(); ++i) {
        const std::string& segment = path.segments[i];
        if (current->is_null()) {
            return Value{};
        }
        if (current->kind() != ValueKind::Object) {
            throw TransformError(TransformErrorKind::PathError,
                                 "cannot read '" + segment + "' from a " + kind_name(*current), path.str());
        }
        const Field* field = nullptr;
        if (level != nullptr) {
            for (const auto& f : *level) {
                if (f.name == segment) {
                    field = &f;
                    break;
                }
            }
            if (field == nullptr) {
                throw TransformError(TransformErrorKind::PathError, "path is not declared by the source schema",
                                     path.str());
            }
        }
        const Value* next = current->as_object().find(segment);
        if (next == nullptr || next->is_null()) {
            if (field != nullptr && field->default_value) {
                holder = *field->default_value;
                current = &holder;
            } else if (field != nullptr && !field->optional) {
                throw TransformError(TransformErrorKind::PathError, "required source field is absent", path.str());
            } else {
                return Value{};
            }
        } else {
            Value copy = *next;
            holder = std::move(copy);
            current = &holder;
        }
        level = (field != nullptr && field->type.kind == TypeKind::Object) ? &field->type.fields : nullptr;
        if (schema != nullptr && level == nullptr && i + 1 < path.segments.size()) {
            throw TransformError(TransformErrorKind::PathError, "path traverses a non-object field", path.str());
        }
    }
    return *current;
}

Value scale_number(const Value& current, double factor) {
    if (!current.is_number()) {
        eval_fail("SCALE expects a number, got " + kind_name(current));
    }
    if (current.kind() == ValueKind::Integer && std::trunc(factor) == factor &&
        std::fabs(factor) < 9.2233720368547758e18) {
        std::int64_t r = 0;
        if (!__builtin_mul_overflow(current.as_int(), static_cast<std::int64_t>(factor), &r)) {
            return Value{r};
        }
    }
    return Value{current.to_double() * factor};
}

Value shift_number(const Value& current, double offset) {
    if (!current.is_number()) {
        eval_fail("SHIFT expects a number, got " + kind_name(current));
    }
    if (current.kind() == ValueKind::Integer && std::trunc(offset) == offset &&
        std::fabs(offset) < 9.2233720368547758e18) {
        std::int64_t r = 0;
        if (!__builtin_add_overflow(current.as_int(), static_cast<std::int64_t>(offset), &r)) {
            return Value{r};
        }
    }
    return Value{current.to_double() + offset};
}

}  // namespace gse
