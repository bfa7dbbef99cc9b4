#include "simseek/textnorm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace simseek {

namespace {

bool is_ascii_punct(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u) != 0;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lower_strip_punct(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (is_ascii_punct(c)) continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        const std::size_t begin = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > begin) out.emplace_back(s.substr(begin, i - begin));
    }
    return out;
}

using Counts = std::unordered_map<std::string, std::size_t>;

Counts count_tokens(const std::vector<std::string>& tokens) {
    Counts c;
    for (const auto& t : tokens) ++c[t];
    return c;
}

// n-gram key with a unit separator so ("a b", "c") and ("a", "b c") differ.
Counts count_ngrams(std::span<const std::string> tokens, int n) {
    Counts c;
    if (tokens.size() < static_cast<std::size_t>(n)) return c;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (int k = 0; k < n; ++k) {
            if (k) key.push_back('\x1f');
            key += tokens[i + k];
        }
        ++c[key];
    }
    return c;
}

struct NgramTally {
    std::array<std::size_t, kMaxBleuOrder> matched{};
    std::array<std::size_t, kMaxBleuOrder> total{};
    std::size_t cand_len = 0;
    std::size_t ref_len = 0;
};

void tally(NgramTally& t, std::span<const std::string> cand, std::span<const std::string> ref, int max_n) {
    t.cand_len += cand.size();
    t.ref_len += ref.size();
    for (int n = 1; n <= max_n; ++n) {
        const Counts c = count_ngrams(cand, n);
        const Counts r = count_ngrams(ref, n);
        for (const auto& [gram, count] : c) {
            const auto it = r.find(gram);
            if (it != r.end()) t.matched[n - 1] += std::min(count, it->second);
            t.total[n - 1] += count;
        }
    }
}

BleuScores combine(const NgramTally& t, int max_n) {
    BleuScores s;
    s.max_n = max_n;
    if (t.cand_len == 0) return s;
    for (int n = 0; n < max_n; ++n)
        s.precision[n] = t.total[n] == 0 ? 0.0 : static_cast<double>(t.matched[n]) / static_cast<double>(t.total[n]);
    s.brevity_penalty = t.cand_len > t.ref_len
                            ? 1.0
                            : std::exp(1.0 - static_cast<double>(t.ref_len) / static_cast<double>(t.cand_len));
    double log_sum = 0.0;
    for (int n = 0; n < max_n; ++n) {
        if (s.precision[n] <= 0.0) break;  // this and every higher order are zero
        log_sum += std::log(s.precision[n]);
        s.bleu[n] = s.brevity_penalty * std::exp(log_sum / (n + 1));
    }
    return s;
}

void check_order(int max_n) {
    if (max_n < 1 || max_n > kMaxBleuOrder) throw std::invalid_argument("BLEU order must be in [1, 4]");
}

const std::vector<std::string> kDefaultMarkers{"other", "else"};

}  // namespace

TokenBag normalize(std::string_view text) {
    TokenBag bag;
    bag.source_len = split_ws(text).size();
    for (auto& tok : split_ws(lower_strip_punct(text))) {
        if (tok == "a" || tok == "an" || tok == "the") continue;
        bag.tokens.push_back(std::move(tok));
    }
    return bag;
}

std::vector<std::string> bleu_tokenize(std::string_view text) { return split_ws(lower_strip_punct(text)); }

std::size_t overlap_count(const TokenBag& a, const TokenBag& b) {
    const Counts ca = count_tokens(a.tokens);
    const Counts cb = count_tokens(b.tokens);
    std::size_t common = 0;
    for (const auto& [tok, n] : ca) {
        const auto it = cb.find(tok);
        if (it != cb.end()) common += std::min(n, it->second);
    }
    return common;
}

double token_f1(const TokenBag& a, const TokenBag& b) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    const std::size_t common = overlap_count(a, b);
    if (common == 0) return 0.0;
    const double precision = static_cast<double>(common) / static_cast<double>(a.size());
    const double recall = static_cast<double>(common) / static_cast<double>(b.size());
    return 2.0 * precision * recall / (precision + recall);
}

double token_precision(const TokenBag& a, const TokenBag& ref) {
    if (a.empty()) return 0.0;
    return static_cast<double>(overlap_count(a, ref)) / static_cast<double>(a.size());
}

double max_f1_over_refs(const TokenBag& pred, std::span<const TokenBag> refs) {
    if (refs.empty()) throw std::invalid_argument("max_f1_over_refs needs at least one reference");
    double best = 0.0;
    for (const auto& r : refs) best = std::max(best, token_f1(pred, r));
    return best;
}

BleuScores bleu(std::span<const std::string> candidate, std::span<const std::string> reference, int max_n) {
    check_order(max_n);
    NgramTally t;
    tally(t, candidate, reference, max_n);
    return combine(t, max_n);
}

BleuScores corpus_bleu(std::span<const BleuPair> pairs, int max_n) {
    check_order(max_n);
    NgramTally t;
    for (const auto& p : pairs) tally(t, p.candidate, p.reference, max_n);
    return combine(t, max_n);
}

std::span<const std::string> default_anything_else_markers() { return kDefaultMarkers; }

bool is_anything_else(std::string_view question) { return is_anything_else(question, kDefaultMarkers); }

bool is_anything_else(std::string_view question, std::span<const std::string> markers) {
    std::size_t i = 0;
    while (i < question.size()) {
        while (i < question.size() && !std::isalnum(static_cast<unsigned char>(question[i]))) ++i;
        std::string word;
        while (i < question.size() && std::isalnum(static_cast<unsigned char>(question[i])))
            word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(question[i++]))));
        if (word.empty()) continue;
        for (const auto& m : markers) {
            if (m.size() != word.size()) continue;
            if (std::equal(m.begin(), m.end(), word.begin(), [](char x, char y) {
                    return std::tolower(static_cast<unsigned char>(x)) == y;
                }))
                return true;
        }
    }
    return false;
}

bool is_unanswerable(const AnswerSpan& answer) { return answer.is_unanswerable || answer.text == kCannotAnswer; }

}  // namespace simseek
