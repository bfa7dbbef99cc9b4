#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "simseek/textnorm.hpp"

using namespace simseek;

namespace {
TokenBag bag(std::initializer_list<const char*> toks) {
    std::vector<std::string> v(toks.begin(), toks.end());
    return TokenBag(v);
}
}  // namespace

TEST_CASE("normalize strips case, punctuation and articles") {
    CHECK(normalize("The cat, sat.").tokens == std::vector<std::string>{"cat", "sat"});
    CHECK(normalize("").empty());
    CHECK(normalize("CANNOTANSWER").tokens == std::vector<std::string>{"cannotanswer"});
    CHECK(normalize("An apple a day").tokens == std::vector<std::string>{"apple", "day"});
    CHECK(normalize("The cat, sat.").source_len == 3);
}

TEST_CASE("normalize is idempotent") {
    std::mt19937_64 g(3);
    for (int i = 0; i < 100; ++i) {
        const auto text = fixtures::join(fixtures::random_words(g, 0, 8)) + "!, the";
        const auto once = normalize(text);
        CHECK(normalize(fixtures::join(once.tokens)).tokens == once.tokens);
    }
}

TEST_CASE("token_f1 examples") {
    CHECK(token_f1(bag({"a1", "b1"}), bag({"a1", "b1"})) == 1.0);
    CHECK(token_f1(bag({"x"}), bag({"y"})) == 0.0);
    CHECK(token_f1(bag({"a1", "b1"}), bag({"a1", "c1"})) == doctest::Approx(0.5));
    CHECK(token_f1(TokenBag{}, TokenBag{}) == 1.0);
    CHECK(token_f1(TokenBag{}, bag({"x"})) == 0.0);
}

TEST_CASE("token_precision examples") {
    CHECK(token_precision(bag({"x"}), bag({"x", "y"})) == 1.0);
    CHECK(token_precision(bag({"x"}), bag({"y"})) == 0.0);
    CHECK(token_precision(bag({"x", "y"}), bag({"x"})) == doctest::Approx(0.5));
    CHECK(token_precision(TokenBag{}, bag({"x"})) == 0.0);
}

TEST_CASE("max_f1_over_refs") {
    const auto pred = bag({"a1", "b1"});
    std::vector<TokenBag> refs{pred};
    CHECK(max_f1_over_refs(pred, refs) == 1.0);
    std::vector<TokenBag> two{bag({"z"}), bag({"a1", "c1"})};
    CHECK(max_f1_over_refs(pred, two) == doctest::Approx(0.5));
    CHECK_THROWS_AS(max_f1_over_refs(pred, std::vector<TokenBag>{}), std::invalid_argument);
}

TEST_CASE("token_f1 symmetry and range, precision on subsets") {
    std::mt19937_64 g(11);
    for (int i = 0; i < 300; ++i) {
        TokenBag a(fixtures::random_words(g, 0, 7, 5));
        TokenBag b(fixtures::random_words(g, 0, 7, 5));
        const double ab = token_f1(a, b);
        CHECK(ab == token_f1(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        if (!a.empty()) CHECK(token_f1(a, a) == 1.0);
        TokenBag sub(std::vector<std::string>(a.tokens.begin(), a.tokens.begin() + a.size() / 2));
        if (!sub.empty()) CHECK(token_precision(sub, a) == 1.0);
    }
}

TEST_CASE("bleu examples") {
    const std::vector<std::string> abcd{"a", "b", "c", "d"}, abce{"a", "b", "c", "e"};
    const auto same = bleu(abcd, abcd);
    for (int n = 0; n < 4; ++n) CHECK(same.bleu[n] == doctest::Approx(1.0));

    const std::vector<std::string> xyz{"x", "y", "z"};
    const auto none = bleu(xyz, abcd);
    for (int n = 0; n < 4; ++n) CHECK(none.bleu[n] == 0.0);

    const auto s = bleu(abcd, abce);
    CHECK(s.bleu[0] == doctest::Approx(0.75));
    CHECK(s.precision[1] == doctest::Approx(2.0 / 3.0));
    // cumulative BLEU-2 is the geometric mean of p1 and p2
    CHECK(s.bleu[1] == doctest::Approx(std::sqrt(0.75 * 2.0 / 3.0)));

    const auto empty = bleu(std::vector<std::string>{}, abcd);
    for (int n = 0; n < 4; ++n) CHECK(empty.bleu[n] == 0.0);
    CHECK_THROWS(bleu(abcd, abcd, 5));
    CHECK_THROWS(bleu(abcd, abcd, 0));
}

TEST_CASE("bleu brevity penalty") {
    const std::vector<std::string> cand{"a", "b"}, ref{"a", "b", "c", "d"};
    const auto s = bleu(cand, ref, 1);
    CHECK(s.brevity_penalty == doctest::Approx(std::exp(1.0 - 2.0)));
    CHECK(s.bleu[0] == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("bleu matches the brute-force counter") {
    std::mt19937_64 g(5);
    for (int i = 0; i < 100; ++i) {
        auto c = fixtures::random_words(g, 1, 8, 4);
        auto r = fixtures::random_words(g, 1, 8, 4);
        const auto got = bleu(c, r);
        const auto want = oracle::bleu({{c, r}}, 4);
        for (int n = 0; n < 4; ++n) CHECK(std::abs(got.bleu[n] - want.b[n]) < 1e-12);
    }
}

TEST_CASE("anything-else detection") {
    CHECK(is_anything_else("Are there any other interesting aspects about this article?"));
    CHECK_FALSE(is_anything_else("What happened during the standoff?"));
    CHECK(is_anything_else("Did he do anything ELSE?"));
    CHECK_FALSE(is_anything_else("Did his brother help?"));  // "other" inside a word
    std::vector<std::string> markers{"besides"};
    CHECK(is_anything_else("Anything besides that?", markers));
    CHECK_FALSE(is_anything_else("Anything else?", markers));
}

TEST_CASE("is_unanswerable") {
    CHECK(is_unanswerable(AnswerSpan{"CANNOTANSWER", std::nullopt, false}));
    CHECK_FALSE(is_unanswerable(AnswerSpan::at("Paris", 0)));
    CHECK(is_unanswerable(AnswerSpan{"weird", std::nullopt, true}));
}
