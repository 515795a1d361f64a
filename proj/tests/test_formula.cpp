#include <ccmm/formula.hpp>

#include "support/formula_corpus.hpp"

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

using namespace ccmm;
using check::kCorpus;
using check::kMalformed;
using Kind = RandomTerm::Kind;

TEST(Formula, AttainModel) {
    const auto f = parse_formula("attain ~ 1 + x + (1|school) + (1|neigh)");
    EXPECT_EQ(f.response, "attain");
    EXPECT_TRUE(f.intercept);
    EXPECT_EQ(f.fixed_terms, std::vector<std::string>{"x"});
    ASSERT_EQ(f.random_terms.size(), 2u);
    EXPECT_EQ(f.random_terms[0].kind, Kind::simple);
    EXPECT_EQ(f.random_terms[0].columns, std::vector<std::string>{"school"});
    EXPECT_EQ(f.random_terms[1].columns, std::vector<std::string>{"neigh"});
    EXPECT_EQ(render_formula(f), "attain ~ 1 + x + (1|school) + (1|neigh)");
}

TEST(Formula, InterceptOnly) {
    const auto f = parse_formula("y ~ 1");
    EXPECT_EQ(f.response, "y");
    EXPECT_TRUE(f.intercept);
    EXPECT_TRUE(f.fixed_terms.empty());
    EXPECT_TRUE(f.pure_fixed());
}

TEST(Formula, CorrelatedPair) {
    const auto f = parse_formula("flow ~ 1 + dist + corr(origin, dest)");
    ASSERT_EQ(f.random_terms.size(), 1u);
    EXPECT_EQ(f.random_terms[0].kind, Kind::correlated_pair);
    EXPECT_EQ(f.random_terms[0].columns, (std::vector<std::string>{"origin", "dest"}));
    EXPECT_EQ(render_formula(f), "flow ~ 1 + dist + corr(origin, dest)");
}

TEST(Formula, InteractionWithMainTerm) {
    const auto f = parse_formula("y ~ 1 + (1|school:neigh) + (1|school)");
    ASSERT_EQ(f.random_terms.size(), 2u);
    EXPECT_EQ(f.random_terms[0].kind, Kind::interaction);
    EXPECT_EQ(f.random_terms[0].columns, (std::vector<std::string>{"school", "neigh"}));
    EXPECT_EQ(f.random_terms[1].kind, Kind::simple);
}

TEST(Formula, Canonicalization) {
    EXPECT_EQ(render_formula(parse_formula("y~1+x+(1|a)")), "y ~ 1 + x + (1|a)");
    EXPECT_EQ(render_formula(parse_formula("y ~ x")), "y ~ 1 + x");
}

TEST(Formula, ZeroSuppressesIntercept) {
    const auto f = parse_formula("y ~ 0 + x + (1|g)");
    EXPECT_FALSE(f.intercept);
    EXPECT_EQ(render_formula(f), "y ~ 0 + x + (1|g)");
    EXPECT_TRUE(parse_formula("y ~ x + 0").intercept == false);
}

TEST(Formula, CorrIsAnOrdinaryNameOutsideACall) {
    const auto f = parse_formula("y ~ corr + (1|g)");
    EXPECT_EQ(f.fixed_terms, std::vector<std::string>{"corr"});
}

TEST(Formula, CorpusRoundTrip) {
    ASSERT_GE(kCorpus.size(), 25u);
    for (const auto& text : kCorpus) {
        const auto f = parse_formula(text);
        const auto rendered = render_formula(f);
        EXPECT_EQ(parse_formula(rendered), f) << text;
        EXPECT_EQ(render_formula(parse_formula(rendered)), rendered) << text;
    }
}

TEST(Formula, MalformedInputsCarryPositions) {
    ASSERT_GE(kMalformed.size(), 10u);
    for (const auto& bad : kMalformed) {
        try {
            parse_formula(bad.text);
            ADD_FAILURE() << "accepted: '" << bad.text << "'";
        } catch (const FormulaError& e) {
            EXPECT_EQ(e.position(), bad.position) << "'" << bad.text << "': " << e.what();
            EXPECT_GE(e.position(), 1u);
            EXPECT_LE(e.position(), std::max<std::size_t>(bad.text.size(), 1)) << bad.text;
        }
    }
}

TEST(Formula, ErrorMessagesNameTheProblem) {
    auto message = [](const std::string& text) {
        try {
            parse_formula(text);
        } catch (const FormulaError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message("y ~ y").find("response"), std::string::npos);
    EXPECT_NE(message("y ~ 1 + (1|g) + (1|g)").find("duplicate"), std::string::npos);
    EXPECT_NE(message("y ~ 1 + (1|a:b:c)").find("two-way"), std::string::npos);
}

// random valid formulas: round-trip and whitespace insensitivity
namespace {

ModelFormula random_formula(std::mt19937& gen) {
    const std::vector<std::string> names = {"a", "b", "c", "d", "x1", "x_2", "grp", "area"};
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen); };
    ModelFormula f;
    f.response = "resp";
    f.intercept = pick(2) == 0;
    for (const auto& n : names)
        if (pick(4) == 0) f.fixed_terms.push_back("f_" + n);
    std::vector<std::string> keys;
    const std::size_t terms = pick(4);
    for (std::size_t t = 0; t < terms; ++t) {
        RandomTerm r;
        const auto kind = pick(3);
        const auto& c1 = names[pick(names.size())];
        auto c2 = names[pick(names.size())];
        if (kind == 0 || c1 == c2) {
            r.kind = Kind::simple;
            r.columns = {c1};
        } else {
            r.kind = kind == 1 ? Kind::interaction : Kind::correlated_pair;
            r.columns = {c1, c2};
        }
        if (std::find(keys.begin(), keys.end(), r.key()) != keys.end()) continue;
        keys.push_back(r.key());
        f.random_terms.push_back(r);
    }
    return f;
}

std::string respace(const std::string& s, std::mt19937& gen) {
    std::string out;
    std::uniform_int_distribution<int> spaces(0, 2);
    for (char c : s) {
        if (c == ' ') {
            const int k = spaces(gen);
            for (int i = 0; i < k; ++i) out += (i % 2 ? '\t' : ' ');
            continue;
        }
        out += c;
        if (std::string("~+(|:,)").find(c) != std::string::npos)
            for (int i = spaces(gen); i > 0; --i) out += ' ';
    }
    return out;
}

}  // namespace

TEST(FormulaProperty, RenderParseIsIdentity) {
    std::mt19937 gen(7);
    for (int i = 0; i < 500; ++i) {
        const auto f = random_formula(gen);
        const auto text = render_formula(f);
        EXPECT_EQ(parse_formula(text), f) << text;
    }
}

TEST(FormulaProperty, WhitespaceInsensitive) {
    std::mt19937 gen(11);
    for (int i = 0; i < 300; ++i) {
        const auto text = render_formula(random_formula(gen));
        const auto spaced = respace(text, gen);
        EXPECT_EQ(parse_formula(spaced), parse_formula(text)) << "'" << spaced << "'";
    }
}

TEST(FormulaProperty, ErrorPositionsStayInsideInput) {
    std::mt19937 gen(3);
    const std::string alphabet = "y~x1+0(|):,corr ab$";
    std::uniform_int_distribution<std::size_t> ch(0, alphabet.size() - 1), len(1, 24);
    int errors = 0;
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        for (auto n = len(gen); n > 0; --n) s += alphabet[ch(gen)];
        try {
            parse_formula(s);
        } catch (const FormulaError& e) {
            ++errors;
            ASSERT_GE(e.position(), 1u) << s;
            ASSERT_LE(e.position(), s.size()) << s;
        }
    }
    EXPECT_GT(errors, 1000);
}
