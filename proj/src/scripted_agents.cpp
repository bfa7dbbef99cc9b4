#include <algorithm>
#include <cctype>

#include "simseek/agents.hpp"
#include "simseek/textnorm.hpp"

namespace simseek {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string_view> split_on(std::string_view text, std::string_view marker) {
    const std::string delim = " " + std::string(marker) + " ";
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    for (;;) {
        const auto next = text.find(delim, pos);
        if (next == std::string_view::npos) {
            parts.push_back(text.substr(pos));
            return parts;
        }
        parts.push_back(text.substr(pos, next - pos));
        pos = next + delim.size();
    }
}

void require_role(const PromptBundle& bundle, std::initializer_list<Role> roles, std::string_view who) {
    if (std::find(roles.begin(), roles.end(), bundle.role) == roles.end())
        throw ProtocolError(std::string(who) + " cannot serve role " + std::string(to_string(bundle.role)));
}

// Leading phrase of a sentence: up to four words, stopping after a word that
// ends in a clause delimiter; trailing punctuation trimmed.
std::pair<std::size_t, std::size_t> leading_phrase(std::string_view passage, std::size_t offset, std::size_t len) {
    const std::string_view s = passage.substr(offset, len);
    std::size_t i = 0;
    std::size_t end = 0;
    for (int words = 0; words < 4 && i < s.size(); ++words) {
        while (i < s.size() && is_space(s[i])) ++i;
        const std::size_t begin = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i == begin) break;
        end = i;
        const char last = s[i - 1];
        if (last == ',' || last == ';' || last == ':') break;
    }
    while (end > 0 && std::ispunct(static_cast<unsigned char>(s[end - 1]))) --end;
    return {offset, end};
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> sentence_spans(std::string_view text) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        if (i >= text.size()) break;
        const std::size_t begin = i;
        while (i < text.size()) {
            const char c = text[i++];
            if ((c == '.' || c == '!' || c == '?') && (i == text.size() || is_space(text[i]))) break;
        }
        spans.emplace_back(begin, i - begin);
    }
    return spans;
}

AgentResponse SpanExtractor::invoke(const PromptBundle& bundle) const {
    require_role(bundle, {Role::cae}, "span-extractor");
    const auto parts = split_on(bundle.text, kBertSep);
    const std::string_view passage = parts.front();
    const auto sentences = sentence_spans(passage);

    std::size_t first = 0;
    if (parts.size() >= 3) {
        const std::string_view prev_answer = parts.back();
        const auto at = prev_answer.empty() ? std::string_view::npos : passage.find(prev_answer);
        if (at != std::string_view::npos) {
            for (std::size_t s = 0; s < sentences.size(); ++s) {
                if (at >= sentences[s].first && at < sentences[s].first + sentences[s].second) {
                    first = s + 1;
                    break;
                }
            }
        }
    }

    AgentResponse response;
    const std::size_t n = sentences.size();
    for (std::size_t r = 0; r < n && response.outputs.size() < k_; ++r) {
        const auto& [off, len] = sentences[(first + r) % n];
        const auto [start, plen] = leading_phrase(passage, off, len);
        if (plen == 0) continue;
        response.outputs.push_back({std::string(passage.substr(start, plen)), start, 1.0 / static_cast<double>(r + 1)});
    }
    response.k = k_;
    return response;
}

AgentResponse TemplateQuestioner::invoke(const PromptBundle& bundle) const {
    require_role(bundle, {Role::cqg_answer, Role::cqg_prior}, "template-questioner");
    if (bundle.role == Role::cqg_prior)
        return AgentResponse{{{bundle.turn % 2 == 1 ? "What happened next?" : "Anything else?", std::nullopt, 1.0}}, {}};

    const std::string mask = " " + std::string(kMask) + " ";
    const std::string tail = " " + std::string(kSep);
    const auto m = bundle.text.rfind(mask);
    if (m == std::string::npos || !bundle.text.ends_with(tail))
        throw ProtocolError("template-questioner: prompt has no <mask> target");
    const std::size_t from = m + mask.size();
    const std::string target = bundle.text.substr(from, bundle.text.size() - tail.size() - from);
    return AgentResponse{{{"What is " + target + "?", std::nullopt, 1.0}}, {}};
}

AgentResponse LexicalAnswerer::invoke(const PromptBundle& bundle) const {
    require_role(bundle, {Role::caf}, "lexical-answerer");
    const auto segments = split_on(bundle.text, kBertSep);
    const TokenBag question = normalize(segments.back());
    const std::string_view passage = bundle.context;

    std::size_t best_overlap = 0;
    std::optional<std::pair<std::size_t, std::size_t>> best;
    for (const auto& [off, len] : sentence_spans(passage)) {
        const std::string_view sentence = passage.substr(off, len);
        const bool already_given =
            std::find(segments.begin(), segments.end() - 1, sentence) != segments.end() - 1;
        if (already_given) continue;
        const std::size_t overlap = overlap_count(question, normalize(sentence));
        if (!best || overlap > best_overlap) {
            best = std::make_pair(off, len);
            best_overlap = overlap;
        }
    }
    if (!best || best_overlap < min_overlap_)
        return AgentResponse{{{std::string(kCannotAnswer), std::nullopt, 0.0}}, {}};
    return AgentResponse{
        {{std::string(passage.substr(best->first, best->second)), best->first, static_cast<double>(best_overlap)}},
        {}};
}

AgentResponse NullAnswerer::invoke(const PromptBundle& bundle) const {
    require_role(bundle, {Role::caf}, "null-answerer");
    return AgentResponse{{{std::string(kCannotAnswer), std::nullopt, 0.0}}, {}};
}

AgentPtr make_scripted_agent(std::string_view name) {
    if (name == "span-extractor") return std::make_shared<SpanExtractor>();
    if (name == "template-questioner" || name == "echo-questioner") return std::make_shared<TemplateQuestioner>();
    if (name == "lexical-answerer") return std::make_shared<LexicalAnswerer>();
    if (name == "null-answerer") return std::make_shared<NullAnswerer>();
    throw std::invalid_argument("unknown scripted agent: " + std::string(name));
}

}  // namespace simseek
