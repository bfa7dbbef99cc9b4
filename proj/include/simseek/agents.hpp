#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "simseek/corpus.hpp"

namespace simseek {

enum class Role { cae, cqg_answer, cqg_prior, caf };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);

// Marker tokens. Backends may remap them; the engine never does.
inline constexpr std::string_view kSep = "<sep>";
inline constexpr std::string_view kMask = "<mask>";
inline constexpr std::string_view kHighlight = "<hl>";
inline constexpr std::string_view kBertSep = "[SEP]";

struct GenerationConfig {
    int beam_size = 5;
    double top_p = 0.98;
    double temperature = 1.2;
    int max_new_tokens = 64;

    bool operator==(const GenerationConfig&) const = default;
};

void validate(const GenerationConfig& cfg);

/// Serialized input for one agent call. `context` carries the evidence
/// passage for the answer finder, which takes a (query, passage) pair; it is
/// empty for the other roles.
struct PromptBundle {
    Role role = Role::cae;
    std::string text;
    std::string context;
    std::size_t turn = 1;
    std::string conv_id;

    bool operator==(const PromptBundle&) const = default;
};

// ---------------------------------------------------------------------------
// Input construction

/// "passage [SEP] q_{t-1} [SEP] a_{t-1}", or the bare passage on turn 1.
PromptBundle build_cae_input(std::string_view passage, const QAPair* prev_turn);

/// Highlighted passage, history, then "<mask> target <sep>".
/// Throws std::invalid_argument when the target is not at its offset.
PromptBundle build_cqg_answer_prompt(std::string_view passage, std::span<const QAPair> history,
                                     const AnswerSpan& target);

/// "title <sep> section <sep> abstract <sep> q1 <sep> a1 ... <mask>".
/// Never reads the passage; it is not a parameter.
PromptBundle build_cqg_prior_prompt(const BackgroundInfo& background, std::span<const QAPair> history);

/// "title [SEP] section [SEP] q1 [SEP] a1 ... [SEP] q_t", paired with the passage.
PromptBundle build_caf_input(std::string_view question, std::string_view passage, std::span<const QAPair> history,
                             const BackgroundInfo& background);

// ---------------------------------------------------------------------------
// Responses

struct AgentOutput {
    std::string text;
    std::optional<std::size_t> start;
    double score = 0.0;

    bool operator==(const AgentOutput&) const = default;
};

struct AgentResponse {
    std::vector<AgentOutput> outputs;
    std::optional<std::size_t> k;  // set by extractors

    bool operator==(const AgentResponse&) const = default;
};

struct ScoredSpan {
    AnswerSpan span;
    double score = 0.0;
};

/// Ranked answer candidates; scores are non-increasing and size() <= k.
class CandidateSet {
public:
    CandidateSet() = default;
    /// Sorts by score (stable, descending) and keeps the top k.
    CandidateSet(std::vector<ScoredSpan> spans, std::size_t k);

    const std::vector<ScoredSpan>& spans() const { return spans_; }
    std::size_t k() const { return k_; }
    bool empty() const { return spans_.empty(); }
    std::size_t size() const { return spans_.size(); }

    CandidateSet truncated(std::size_t k) const;

private:
    std::vector<ScoredSpan> spans_;
    std::size_t k_ = 0;
};

/// Interprets an extractor response against the passage. Outputs whose text
/// is not at the stated offset are relocated by first occurrence or dropped.
CandidateSet to_candidate_set(const AgentResponse& response, std::string_view passage, std::size_t k);

/// Interprets an answer-finder response as a span in the passage. Empty text
/// or CANNOTANSWER yields an unanswerable span. Throws ProtocolError when the
/// text cannot be located in the passage.
AnswerSpan to_answer_span(const AgentResponse& response, std::string_view passage);

/// First output text. Throws ProtocolError when there is none or it is blank.
std::string first_text(const AgentResponse& response);

// ---------------------------------------------------------------------------
// Agents

class AgentError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class TransportError : public AgentError {
    using AgentError::AgentError;
};
class ProtocolError : public AgentError {
    using AgentError::AgentError;
};

/// Implementations must be safe to invoke concurrently.
class Agent {
public:
    virtual ~Agent() = default;
    virtual AgentResponse invoke(const PromptBundle& bundle) const = 0;
    virtual std::string identity() const = 0;
};

using AgentPtr = std::shared_ptr<const Agent>;

// Scripted agents: deterministic pure functions of the bundle.

/// CAE stand-in. Ranks passage sentences starting after the one that holds
/// the previous answer (cyclically) and returns each sentence's leading
/// phrase, scored 1/(rank+1).
class SpanExtractor final : public Agent {
public:
    explicit SpanExtractor(std::size_t k = 10) : k_(k) {}
    AgentResponse invoke(const PromptBundle& bundle) const override;
    std::string identity() const override { return "scripted:span-extractor"; }

private:
    std::size_t k_;
};

/// CQG stand-in. Answer-grounded: "What is <target>?". Prior-grounded:
/// alternates "What happened next?" and "Anything else?" by turn.
class TemplateQuestioner final : public Agent {
public:
    AgentResponse invoke(const PromptBundle& bundle) const override;
    std::string identity() const override { return "scripted:template-questioner"; }
};

/// CAF stand-in. Returns the passage sentence with the largest token overlap
/// with the current question, skipping sentences already given as answers;
/// CANNOTANSWER when the best overlap is below `min_overlap`.
class LexicalAnswerer final : public Agent {
public:
    explicit LexicalAnswerer(std::size_t min_overlap = 1) : min_overlap_(min_overlap) {}
    AgentResponse invoke(const PromptBundle& bundle) const override;
    std::string identity() const override { return "scripted:lexical-answerer"; }

private:
    std::size_t min_overlap_;
};

/// Always CANNOTANSWER.
class NullAnswerer final : public Agent {
public:
    AgentResponse invoke(const PromptBundle& bundle) const override;
    std::string identity() const override { return "scripted:null-answerer"; }
};

/// Names: span-extractor, template-questioner (alias echo-questioner),
/// lexical-answerer, null-answerer. Throws std::invalid_argument otherwise.
AgentPtr make_scripted_agent(std::string_view name);

/// Splits text into sentences at '.', '!' or '?' followed by whitespace or
/// end of text. Returns (offset, length) pairs, leading spaces trimmed.
std::vector<std::pair<std::size_t, std::size_t>> sentence_spans(std::string_view text);

// ---------------------------------------------------------------------------
// Endpoints and the remote client

struct ScriptedKind {
    std::string name;
};
struct RemoteKind {
    std::string address;  // http://host:port
};

struct AgentEndpoint {
    std::variant<ScriptedKind, RemoteKind> kind;
    GenerationConfig generation;
    std::chrono::milliseconds timeout{30000};
    int retries = 2;
    std::size_t max_in_flight = 4;
    std::chrono::milliseconds backoff{200};  // doubles after each failed attempt
};

void validate(const AgentEndpoint& endpoint);

struct HostPort {
    std::string host;
    int port = 80;
};

/// Parses "http://host:port[/]". Throws std::invalid_argument when malformed.
HostPort parse_address(std::string_view address);

/// Request body for POST /v1/generate.
std::string wire_request(const PromptBundle& bundle, const GenerationConfig& generation,
                         const std::string& request_id);

/// Parses and checks a reply body. Throws ProtocolError on schema errors or a
/// request_id mismatch.
AgentResponse parse_wire_reply(std::string_view body, Role role, const std::string& request_id);

class RemoteAgent final : public Agent {
public:
    explicit RemoteAgent(AgentEndpoint endpoint);
    ~RemoteAgent() override;

    AgentResponse invoke(const PromptBundle& bundle) const override;
    std::string identity() const override;

private:
    struct State;
    AgentEndpoint endpoint_;
    HostPort target_;
    std::unique_ptr<State> state_;
};

AgentPtr make_agent(const AgentEndpoint& endpoint);

/// Agent endpoints by role name (extractor, questioner, answerer, filter),
/// loaded from a JSON config:
///   {"generation": {...}, "extractor": {"scripted": "span-extractor"},
///    "questioner": {"remote": "http://127.0.0.1:9000", "timeout_ms": 5000, "retries": 2}}
struct AgentsConfig {
    GenerationConfig generation;
    std::map<std::string, AgentEndpoint> endpoints;

    const AgentEndpoint& at(const std::string& slot) const;
};

AgentsConfig parse_agents_config(std::string_view json_text);
AgentsConfig load_agents_config(const std::string& path);

}  // namespace simseek
