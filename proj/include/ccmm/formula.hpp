#pragma once

// Model-formula mini-language for Gaussian random-intercept models.
//
//   formula := ident "~" fixed ("+" random)*
//   fixed   := fterm ("+" fterm)*
//   fterm   := "1" | "0" | ident
//   random  := "(" "1" "|" cexpr ")" | "corr" "(" ident "," ident ")"
//   cexpr   := ident (":" ident)?
//
// Whitespace is insignificant. "0" in the fixed part removes the intercept.

#include <ccmm/error.hpp>

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ccmm {

struct RandomTerm {
    enum class Kind { simple, interaction, correlated_pair };

    Kind kind = Kind::simple;
    std::vector<std::string> columns;

    /// Text of the classification expression, e.g. "school", "school:neigh", "corr(origin, dest)".
    std::string expression() const {
        switch (kind) {
        case Kind::simple:
            return columns.at(0);
        case Kind::interaction:
            return columns.at(0) + ":" + columns.at(1);
        case Kind::correlated_pair:
            return "corr(" + columns.at(0) + ", " + columns.at(1) + ")";
        }
        return {};
    }

    /// Order-insensitive identity used for duplicate detection: a:b and b:a are the same partition.
    std::string key() const {
        if (kind == Kind::simple) return "s|" + columns.at(0);
        auto lo = std::min(columns.at(0), columns.at(1));
        auto hi = std::max(columns.at(0), columns.at(1));
        return (kind == Kind::interaction ? "i|" : "c|") + lo + "|" + hi;
    }

    bool operator==(const RandomTerm&) const = default;
};

struct ModelFormula {
    std::string response;
    bool intercept = true;
    std::vector<std::string> fixed_terms;
    std::vector<RandomTerm> random_terms;

    /// Legal but unusual: nothing to partition.
    bool pure_fixed() const noexcept { return random_terms.empty(); }

    bool operator==(const ModelFormula&) const = default;
};

namespace detail {

struct FormulaToken {
    enum class Type { ident, number, tilde, plus, lparen, rparen, bar, colon, comma, end };
    Type type;
    std::string text;
    std::size_t pos;  // 1-based
};

inline std::vector<FormulaToken> tokenize_formula(std::string_view text) {
    using T = FormulaToken::Type;
    std::vector<FormulaToken> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        const std::size_t pos = i + 1;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i + 1;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                ++j;
            out.push_back({T::ident, std::string(text.substr(i, j - i)), pos});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i + 1;
            while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
            out.push_back({T::number, std::string(text.substr(i, j - i)), pos});
            i = j;
            continue;
        }
        T type;
        switch (c) {
        case '~': type = T::tilde; break;
        case '+': type = T::plus; break;
        case '(': type = T::lparen; break;
        case ')': type = T::rparen; break;
        case '|': type = T::bar; break;
        case ':': type = T::colon; break;
        case ',': type = T::comma; break;
        default:
            throw FormulaError(std::string("unexpected character '") + c + "'", pos);
        }
        out.push_back({type, std::string(1, c), pos});
        ++i;
    }
    // errors at end of input point at the last character
    out.push_back({T::end, "", std::max<std::size_t>(text.size(), 1)});
    return out;
}

class FormulaParser {
    using T = FormulaToken::Type;

public:
    explicit FormulaParser(std::string_view text) : toks_(tokenize_formula(text)) {}

    ModelFormula parse() {
        ModelFormula f;
        f.response = expect(T::ident, "response name").text;
        expect(T::tilde, "'~'");
        parse_fixed(f);
        while (peek().type == T::plus) {
            next();
            if (!starts_random()) {
                throw FormulaError("fixed terms must precede random terms", peek().pos);
            }
            parse_random(f);
        }
        if (peek().type != T::end) {
            throw FormulaError("unexpected '" + peek().text + "'", peek().pos);
        }
        return f;
    }

private:
    const FormulaToken& peek(std::size_t ahead = 0) const {
        return toks_[std::min(idx_ + ahead, toks_.size() - 1)];
    }
    const FormulaToken& next() { return toks_[std::min(idx_++, toks_.size() - 1)]; }

    const FormulaToken& expect(T type, const char* what) {
        const auto& t = peek();
        if (t.type != type) {
            throw FormulaError(std::string("expected ") + what +
                                   (t.type == T::end ? " but input ended" : ", found '" + t.text + "'"),
                               t.pos);
        }
        return next();
    }

    bool starts_random() const {
        if (peek().type == T::lparen) return true;
        return peek().type == T::ident && peek().text == "corr" && peek(1).type == T::lparen;
    }

    void parse_fixed(ModelFormula& f) {
        bool saw_one = false;
        bool saw_zero = false;
        auto fterm = [&] {
            const auto& t = peek();
            if (t.type == T::number) {
                if (t.text == "1") {
                    if (saw_zero) throw FormulaError("'1' conflicts with earlier '0'", t.pos);
                    saw_one = true;
                } else if (t.text == "0") {
                    if (saw_one) throw FormulaError("'0' conflicts with earlier '1'", t.pos);
                    saw_zero = true;
                } else {
                    throw FormulaError("only '0' or '1' may appear as numeric terms", t.pos);
                }
                next();
                return;
            }
            const auto& id = expect(T::ident, "fixed term");
            if (id.text == f.response) {
                throw FormulaError("response '" + id.text + "' used as a predictor", id.pos);
            }
            if (std::find(f.fixed_terms.begin(), f.fixed_terms.end(), id.text) != f.fixed_terms.end()) {
                throw FormulaError("duplicate fixed term '" + id.text + "'", id.pos);
            }
            f.fixed_terms.push_back(id.text);
        };
        fterm();
        while (peek().type == T::plus) {
            ++idx_;
            if (starts_random()) {
                --idx_;
                break;
            }
            fterm();
        }
        f.intercept = !saw_zero;
    }

    void parse_random(ModelFormula& f) {
        const std::size_t start = peek().pos;
        RandomTerm term;
        if (peek().type == T::ident) {
            next();  // corr
            expect(T::lparen, "'('");
            term.kind = RandomTerm::Kind::correlated_pair;
            term.columns.push_back(expect(T::ident, "column name").text);
            expect(T::comma, "','");
            const auto& second = expect(T::ident, "column name");
            term.columns.push_back(second.text);
            if (term.columns[0] == term.columns[1]) {
                throw FormulaError("correlated pair needs two distinct columns", second.pos);
            }
            expect(T::rparen, "')'");
        } else {
            expect(T::lparen, "'('");
            const auto& one = peek();
            if (one.type != T::number || one.text != "1") {
                throw FormulaError("only random intercepts '(1|...)' are supported", one.pos);
            }
            next();
            expect(T::bar, "'|'");
            term.columns.push_back(expect(T::ident, "classification name").text);
            if (peek().type == T::colon) {
                next();
                const auto& second = expect(T::ident, "classification name");
                if (second.text == term.columns[0]) {
                    throw FormulaError("interaction needs two distinct classifications", second.pos);
                }
                term.columns.push_back(second.text);
                term.kind = RandomTerm::Kind::interaction;
                if (peek().type == T::colon) {
                    throw FormulaError("only two-way interactions are supported", peek().pos);
                }
            }
            expect(T::rparen, "')'");
        }
        for (const auto& existing : f.random_terms) {
            if (existing.key() == term.key()) {
                throw FormulaError("duplicate classification '" + term.expression() + "'", start);
            }
        }
        f.random_terms.push_back(std::move(term));
    }

    std::vector<FormulaToken> toks_;
    std::size_t idx_ = 0;
};

}  // namespace detail

/// Parses formula text. Throws FormulaError with a 1-based position.
inline ModelFormula parse_formula(std::string_view text) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        throw FormulaError("empty formula", 1);
    }
    return detail::FormulaParser(text).parse();
}

/// Canonical text: single spaces around '~' and '+', terms in their original order.
inline std::string render_formula(const ModelFormula& f) {
    std::string out = f.response + " ~ " + (f.intercept ? "1" : "0");
    for (const auto& t : f.fixed_terms) out += " + " + t;
    for (const auto& r : f.random_terms) {
        out += " + ";
        out += r.kind == RandomTerm::Kind::correlated_pair ? r.expression() : "(1|" + r.expression() + ")";
    }
    return out;
}

}  // namespace ccmm
