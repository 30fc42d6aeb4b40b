#include "tbt/spec.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

namespace tbt {

ParseError::ParseError(const std::string& msg, std::size_t line, std::size_t column)
    : std::runtime_error(fmt::format("{}:{}: {}", line, column, msg)),
      line_(line),
      column_(column),
      detail_(msg) {}

const TernaryPredicate* SpecDocument::find_predicate(std::string_view name) const {
    for (const auto& p : predicates) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

namespace {

enum class Tok { Ident, Number, LBracket, RBracket, LParen, RParen, Comma, Semi, Define, Star, Geq, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0.0;
    bool integral = false;
    std::size_t line = 1;
    std::size_t column = 1;
};

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::Ident: return "identifier";
        case Tok::Number: return "number";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Comma: return "','";
        case Tok::Semi: return "';'";
        case Tok::Define: return "':='";
        case Tok::Star: return "'*'";
        case Tok::Geq: return "'>='";
        case Tok::End: return "end of input";
    }
    return "?";
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.line = line_;
            t.column = col_;
            if (pos_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t start = pos_;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                    advance();
                }
                t.kind = Tok::Ident;
                t.text = std::string(src_.substr(start, pos_ - start));
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
                       ((c == '-' || c == '+') && pos_ + 1 < src_.size() &&
                        (std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) ||
                         src_[pos_ + 1] == '.'))) {
                lex_number(t);
            } else {
                switch (c) {
                    case '[': t.kind = Tok::LBracket; break;
                    case ']': t.kind = Tok::RBracket; break;
                    case '(': t.kind = Tok::LParen; break;
                    case ')': t.kind = Tok::RParen; break;
                    case ',': t.kind = Tok::Comma; break;
                    case ';': t.kind = Tok::Semi; break;
                    case '*': t.kind = Tok::Star; break;
                    case ':':
                        if (peek(1) != '=') throw ParseError("expected ':='", line_, col_);
                        t.kind = Tok::Define;
                        advance();
                        break;
                    case '>':
                        if (peek(1) != '=') throw ParseError("expected '>='", line_, col_);
                        t.kind = Tok::Geq;
                        advance();
                        break;
                    default:
                        throw ParseError(fmt::format("unexpected character '{}'", c), line_, col_);
                }
                advance();
            }
            out.push_back(std::move(t));
        }
    }

private:
    char peek(std::size_t k) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                return;
            }
        }
    }

    void lex_number(Token& t) {
        std::size_t start = pos_;
        bool integral = true;
        if (src_[pos_] == '-' || src_[pos_] == '+') advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            integral = false;
            advance();
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            integral = false;
            advance();
            if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) advance();
            if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                throw ParseError("malformed exponent", line_, col_);
            }
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        }
        std::string text(src_.substr(start, pos_ - start));
        std::string parse_text = text.front() == '+' ? text.substr(1) : text;
        double v = 0.0;
        auto [ptr, ec] =
            std::from_chars(parse_text.data(), parse_text.data() + parse_text.size(), v);
        if (ec != std::errc() || ptr != parse_text.data() + parse_text.size()) {
            throw ParseError(fmt::format("malformed number '{}'", text), t.line, t.column);
        }
        t.kind = Tok::Number;
        t.text = std::move(text);
        t.number = v;
        t.integral = integral;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

class Parser {
public:
    Parser(std::vector<Token> toks, std::size_t dim) : toks_(std::move(toks)), dim_(dim) {}

    SpecDocument run() {
        while (is_word("pred")) parse_pred_decl();
        if (!is_word("formula")) error_here("expected 'pred' or 'formula'");
        next();
        SpecDocument doc{{}, parse_formula(), 0, dim_, {}};
        doc.predicates = std::move(preds_);
        if (at(Tok::Semi)) {
            next();
            if (is_word("at")) {
                next();
                const Token& t = expect(Tok::Number);
                if (!t.integral || t.number < 0) {
                    throw ParseError("evaluation time must be a nonnegative integer", t.line,
                                     t.column);
                }
                doc.t_star = static_cast<int>(t.number);
                if (at(Tok::Semi)) next();
            }
        }
        if (!at(Tok::End)) error_here("unexpected trailing input");
        return doc;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& look(std::size_t k) const {
        return toks_[std::min(pos_ + k, toks_.size() - 1)];
    }
    bool at(Tok k) const { return cur().kind == k; }
    bool is_word(std::string_view w) const { return at(Tok::Ident) && cur().text == w; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void error_here(const std::string& msg) const {
        throw ParseError(fmt::format("{} (found {})", msg,
                                     at(Tok::End) ? std::string("end of input")
                                                  : "'" + cur().text + "'"),
                         cur().line, cur().column);
    }

    const Token& expect(Tok k) {
        if (!at(k)) error_here(fmt::format("expected {}", tok_name(k)));
        return next();
    }

    void expect_word(std::string_view w) {
        if (!is_word(w)) error_here(fmt::format("expected '{}'", w));
        next();
    }

    void parse_pred_decl() {
        next();  // pred
        const Token name = expect(Tok::Ident);
        if (find(name.text) != nullptr) {
            throw ParseError(fmt::format("duplicate predicate '{}'", name.text), name.line,
                             name.column);
        }
        expect(Tok::Define);
        const Token open = expect(Tok::LBracket);
        std::vector<double> coeffs;
        coeffs.push_back(expect(Tok::Number).number);
        while (at(Tok::Comma)) {
            next();
            coeffs.push_back(expect(Tok::Number).number);
        }
        expect(Tok::RBracket);
        if (coeffs.size() != dim_) {
            throw ParseError(fmt::format("predicate '{}' has {} coefficients, state dimension is {}",
                                         name.text, coeffs.size(), dim_),
                             open.line, open.column);
        }
        expect(Tok::Star);
        expect_word("x");
        expect(Tok::Geq);
        double offset = expect(Tok::Number).number;
        expect(Tok::LParen);
        expect_word("delta");
        const Token dtok = expect(Tok::Number);
        if (dtok.number < 0) {
            throw ParseError(fmt::format("predicate '{}' has delta < 0", name.text), dtok.line,
                             dtok.column);
        }
        expect(Tok::RParen);
        expect(Tok::Semi);
        try {
            preds_.push_back(make_predicate(name.text, std::move(coeffs), offset, dtok.number));
        } catch (const FormulaError& e) {
            throw ParseError(e.what(), name.line, name.column);
        }
    }

    int parse_bound() {
        const Token& t = expect(Tok::Number);
        if (!t.integral) throw ParseError("interval bounds must be integers", t.line, t.column);
        if (t.number < 0) throw ParseError("negative interval bound", t.line, t.column);
        return static_cast<int>(t.number);
    }

    std::vector<Formula> parse_operands() {
        expect(Tok::LParen);
        std::vector<Formula> fs;
        fs.push_back(parse_formula());
        while (at(Tok::Comma)) {
            next();
            fs.push_back(parse_formula());
        }
        expect(Tok::RParen);
        return fs;
    }

    Formula parse_formula() {
        if (!at(Tok::Ident)) error_here("expected a formula");
        const Token word = cur();
        const bool call = look(1).kind == Tok::LParen;
        if ((word.text == "G" || word.text == "F") && look(1).kind == Tok::LBracket) {
            next();
            next();
            int a = parse_bound();
            expect(Tok::Comma);
            int b = parse_bound();
            expect(Tok::RBracket);
            if (b < a) {
                throw ParseError(fmt::format("inverted interval [{},{}]", a, b), word.line,
                                 word.column);
            }
            Formula body = parse_formula();
            return word.text == "G" ? Formula::always(a, b, std::move(body))
                                    : Formula::eventually(a, b, std::move(body));
        }
        if (call && word.text == "not") {
            next();
            auto fs = parse_operands();
            if (fs.size() != 1) throw ParseError("not takes one operand", word.line, word.column);
            return Formula::negation(std::move(fs.front()));
        }
        if (call && (word.text == "implies" || word.text == "iff")) {
            next();
            auto fs = parse_operands();
            if (fs.size() != 2) {
                throw ParseError(fmt::format("{} takes two operands", word.text), word.line,
                                 word.column);
            }
            Formula fwd = Formula::disjunction({Formula::negation(fs[0]), fs[1]});
            if (word.text == "implies") return fwd;
            Formula bwd = Formula::disjunction({Formula::negation(fs[1]), fs[0]});
            return Formula::conjunction({std::move(fwd), std::move(bwd)});
        }
        if (call && (word.text == "and" || word.text == "or" || word.text == "seq" ||
                     word.text == "sel")) {
            next();
            auto fs = parse_operands();
            if (word.text == "and") return Formula::conjunction(std::move(fs));
            if (word.text == "or") return Formula::disjunction(std::move(fs));
            if (word.text == "seq") return Formula::sequence(std::move(fs));
            return Formula::selector(std::move(fs));
        }
        next();
        const TernaryPredicate* mu = find(word.text);
        if (mu == nullptr) {
            throw ParseError(fmt::format("unknown predicate '{}'", word.text), word.line,
                             word.column);
        }
        return Formula::predicate(*mu);
    }

    const TernaryPredicate* find(std::string_view name) const {
        for (const auto& p : preds_) {
            if (p.name == name) return &p;
        }
        return nullptr;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::size_t dim_;
    std::vector<TernaryPredicate> preds_;
};

void lint(const Formula& f, std::vector<std::string>& warnings) {
    if (f.kind() == NodeKind::Sel && f.child(0).is_timed()) {
        warnings.push_back(fmt::format(
            "sel condition operand '{}' is timed; condition nodes are expected to be untimed",
            to_string(f.child(0))));
    }
    for (const Formula& c : f.children()) lint(c, warnings);
}

std::string render_number(double v) { return fmt::format("{}", v); }

}  // namespace

SpecDocument parse_spec(std::string_view text, std::size_t state_dim) {
    if (state_dim == 0) throw ParseError("state dimension must be positive", 1, 1);
    Parser parser(Lexer(text).run(), state_dim);
    SpecDocument doc = parser.run();
    lint(doc.formula, doc.warnings);
    return doc;
}

std::string to_spec_text(const SpecDocument& doc) {
    std::ostringstream os;
    for (const auto& p : doc.predicates) {
        os << "pred " << p.name << " := [";
        for (std::size_t i = 0; i < p.coeffs.size(); ++i) {
            if (i) os << ", ";
            os << render_number(p.coeffs[i]);
        }
        os << "]*x >= " << render_number(p.offset) << " (delta " << render_number(p.delta)
           << ");\n";
    }
    os << "formula " << to_string(doc.formula);
    if (doc.t_star != 0) os << "; at " << doc.t_star;
    os << '\n';
    return os.str();
}

SpecDocument make_spec(const Formula& f, std::size_t state_dim, int t_star) {
    SpecDocument doc{{}, f, t_star, state_dim, {}};
    for_each_predicate(f, [&](const TernaryPredicate& mu) {
        if (mu.coeffs.size() != state_dim) {
            throw FormulaError(fmt::format("predicate '{}' has dimension {}, expected {}", mu.name,
                                           mu.coeffs.size(), state_dim));
        }
        if (const auto* existing = doc.find_predicate(mu.name)) {
            if (!(*existing == mu)) {
                throw FormulaError(fmt::format("conflicting definitions of predicate '{}'", mu.name));
            }
            return;
        }
        doc.predicates.push_back(mu);
    });
    lint(doc.formula, doc.warnings);
    return doc;
}

}  // namespace tbt
