#include <algorithm>

#include "simseek/agents.hpp"

namespace simseek {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::cae: return "cae";
        case Role::cqg_answer: return "cqg_answer";
        case Role::cqg_prior: return "cqg_prior";
        case Role::caf: return "caf";
    }
    return "cae";
}

Role role_from_string(std::string_view s) {
    if (s == "cae") return Role::cae;
    if (s == "cqg_answer") return Role::cqg_answer;
    if (s == "cqg_prior") return Role::cqg_prior;
    if (s == "caf") return Role::caf;
    throw std::invalid_argument("unknown role: " + std::string(s));
}

void validate(const GenerationConfig& cfg) {
    if (cfg.beam_size < 1) throw std::invalid_argument("beam_size must be >= 1");
    if (!(cfg.top_p > 0.0 && cfg.top_p <= 1.0)) throw std::invalid_argument("top_p must be in (0, 1]");
    if (!(cfg.temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    if (cfg.max_new_tokens < 1) throw std::invalid_argument("max_new_tokens must be >= 1");
}

namespace {

// Joins non-empty pieces with single spaces, so an empty history does not
// leave a double space between neighbouring markers.
std::string join_words(std::initializer_list<std::string_view> parts) {
    std::string out;
    for (auto p : parts) {
        if (p.empty()) continue;
        if (!out.empty()) out.push_back(' ');
        out.append(p);
    }
    return out;
}

// "q1 <sep> a1 <sep> q2 <sep> a2" (or with [SEP]).
std::string serialize_history(std::span<const QAPair> history, std::string_view sep) {
    std::string out;
    for (const auto& pair : history) {
        for (const std::string* piece : {&pair.question, &pair.answer.text}) {
            if (!out.empty()) {
                out.push_back(' ');
                out.append(sep);
                out.push_back(' ');
            }
            out.append(*piece);
        }
    }
    return out;
}

}  // namespace

PromptBundle build_cae_input(std::string_view passage, const QAPair* prev_turn) {
    PromptBundle b;
    b.role = Role::cae;
    b.text = std::string(passage);
    if (prev_turn) {
        b.text = join_words({passage, kBertSep, prev_turn->question, kBertSep, prev_turn->answer.text});
        b.turn = prev_turn->turn_index + 1;
    }
    return b;
}

PromptBundle build_cqg_answer_prompt(std::string_view passage, std::span<const QAPair> history,
                                     const AnswerSpan& target) {
    if (target.is_unanswerable || !span_matches(target, passage))
        throw std::invalid_argument("target answer is not a span of the passage at its offset");
    const std::size_t start = *target.start;
    const std::size_t end = start + target.text.size();

    std::string highlighted;
    highlighted.reserve(passage.size() + 2 * kHighlight.size() + 2);
    highlighted.append(passage.substr(0, start));
    highlighted.append(kHighlight);
    highlighted.push_back(' ');
    highlighted.append(target.text);
    highlighted.push_back(' ');
    highlighted.append(kHighlight);
    highlighted.append(passage.substr(end));

    PromptBundle b;
    b.role = Role::cqg_answer;
    b.turn = history.size() + 1;
    b.text = join_words({highlighted, kSep, serialize_history(history, kSep), kMask, target.text, kSep});
    return b;
}

PromptBundle build_cqg_prior_prompt(const BackgroundInfo& background, std::span<const QAPair> history) {
    // Empty background fields are emitted verbatim as empty segments.
    std::string prior = background.title + " " + std::string(kSep) + " " + background.section_title + " " +
                        std::string(kSep) + " " + background.abstract;
    PromptBundle b;
    b.role = Role::cqg_prior;
    b.turn = history.size() + 1;
    b.text = join_words({prior, kSep, serialize_history(history, kSep), kMask});
    return b;
}

PromptBundle build_caf_input(std::string_view question, std::string_view passage, std::span<const QAPair> history,
                             const BackgroundInfo& background) {
    std::string query = background.title + " " + std::string(kBertSep) + " " + background.section_title;
    const std::string hist = serialize_history(history, kBertSep);
    if (!hist.empty()) query = join_words({query, kBertSep, hist});
    query = join_words({query, kBertSep, question});

    PromptBundle b;
    b.role = Role::caf;
    b.turn = history.size() + 1;
    b.text = std::move(query);
    b.context = std::string(passage);
    return b;
}

// ---------------------------------------------------------------------------

CandidateSet::CandidateSet(std::vector<ScoredSpan> spans, std::size_t k) : spans_(std::move(spans)), k_(k) {
    std::stable_sort(spans_.begin(), spans_.end(),
                     [](const ScoredSpan& a, const ScoredSpan& b) { return a.score > b.score; });
    if (spans_.size() > k_) spans_.resize(k_);
}

CandidateSet CandidateSet::truncated(std::size_t k) const { return CandidateSet(spans_, std::min(k, k_)); }

CandidateSet to_candidate_set(const AgentResponse& response, std::string_view passage, std::size_t k) {
    std::vector<ScoredSpan> spans;
    for (const auto& out : response.outputs) {
        if (out.text.empty() || out.text == kCannotAnswer) continue;
        if (out.start) {
            auto span = AnswerSpan::at(out.text, *out.start);
            if (span_matches(span, passage)) {
                spans.push_back({std::move(span), out.score});
                continue;
            }
        }
        const auto found = passage.find(out.text);
        if (found != std::string_view::npos) spans.push_back({AnswerSpan::at(out.text, found), out.score});
    }
    return CandidateSet(std::move(spans), k);
}

std::string first_text(const AgentResponse& response) {
    if (response.outputs.empty()) throw ProtocolError("reply has no outputs");
    const auto& text = response.outputs.front().text;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ProtocolError("reply text is empty");
    return text;
}

AnswerSpan to_answer_span(const AgentResponse& response, std::string_view passage) {
    if (response.outputs.empty()) throw ProtocolError("reply has no outputs");
    const auto& out = response.outputs.front();
    if (out.text.empty() || out.text == kCannotAnswer) return AnswerSpan::unanswerable();
    if (out.start) {
        auto span = AnswerSpan::at(out.text, *out.start);
        if (span_matches(span, passage)) return span;
    }
    const auto found = passage.find(out.text);
    if (found == std::string_view::npos) throw ProtocolError("answer text is not a span of the passage");
    return AnswerSpan::at(out.text, found);
}

}  // namespace simseek
