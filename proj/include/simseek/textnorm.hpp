#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simseek/corpus.hpp"

namespace simseek {

/// Multiset of normalized tokens. Order is kept for n-gram use but all
/// overlap metrics treat it as a multiset.
struct TokenBag {
    std::vector<std::string> tokens;
    std::size_t source_len = 0;  // raw whitespace token count

    TokenBag() = default;
    explicit TokenBag(std::vector<std::string> toks)
        : tokens(std::move(toks)), source_len(tokens.size()) {}

    bool empty() const { return tokens.empty(); }
    std::size_t size() const { return tokens.size(); }
};

/// Extractive-QA normalization: lowercase, delete ASCII punctuation, drop the
/// articles a/an/the, split on whitespace.
TokenBag normalize(std::string_view text);

/// Lowercase + punctuation removal + whitespace split, articles kept. Used
/// for BLEU where articles are part of the surface form.
std::vector<std::string> bleu_tokenize(std::string_view text);

/// Size of the multiset intersection.
std::size_t overlap_count(const TokenBag& a, const TokenBag& b);

double token_f1(const TokenBag& a, const TokenBag& b);
double token_precision(const TokenBag& a, const TokenBag& ref);

/// Max token_f1 over references. Throws std::invalid_argument when refs is empty.
double max_f1_over_refs(const TokenBag& pred, std::span<const TokenBag> refs);

inline constexpr int kMaxBleuOrder = 4;

struct BleuScores {
    int max_n = kMaxBleuOrder;
    std::array<double, kMaxBleuOrder> bleu{};       // cumulative BLEU-1..BLEU-max_n
    std::array<double, kMaxBleuOrder> precision{};  // clipped n-gram precision p_1..p_max_n
    double brevity_penalty = 0.0;
};

struct BleuPair {
    std::vector<std::string> candidate;
    std::vector<std::string> reference;
};

/// Sentence BLEU (single reference, no smoothing). B-n is the brevity penalty
/// times the geometric mean of p_1..p_n. Empty candidates score zero.
BleuScores bleu(std::span<const std::string> candidate, std::span<const std::string> reference, int max_n = 4);

/// Corpus BLEU: n-gram counts and lengths are pooled before combining.
BleuScores corpus_bleu(std::span<const BleuPair> pairs, int max_n = 4);

std::span<const std::string> default_anything_else_markers();

/// Whole-word, case-insensitive marker detection on the raw question.
bool is_anything_else(std::string_view question);
bool is_anything_else(std::string_view question, std::span<const std::string> markers);

/// The flag wins; otherwise the literal CANNOTANSWER text.
bool is_unanswerable(const AnswerSpan& answer);

}  // namespace simseek
