#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "simseek/agents.hpp"
#include "simseek/corpus.hpp"

namespace simseek {

enum class SimulationMode { sym, asym };
enum class CandidatePolicy { top1, top1_dedup, uniform_random };

std::string_view to_string(SimulationMode mode);
SimulationMode mode_from_string(std::string_view s);
std::string_view to_string(CandidatePolicy policy);
CandidatePolicy policy_from_string(std::string_view s);

struct SimulationConfig {
    SimulationMode mode = SimulationMode::sym;
    std::size_t max_turns = 6;
    std::optional<std::size_t> unanswerable_budget;  // stop once the count exceeds it
    std::size_t k = 10;
    CandidatePolicy candidate_policy = CandidatePolicy::top1;
    std::uint64_t seed = 0;
};

void validate(const SimulationConfig& config);

/// Semi-supervised setting: six turns, no early termination.
SimulationConfig semi_supervised_config(SimulationMode mode);
/// Wiki setting: asymmetric, twelve turns, stop after more than three
/// unanswerable questions.
SimulationConfig wiki_config();

struct FilterConfig {
    double f1_threshold = 0.5;
    bool drop_below = true;
};

void validate(const FilterConfig& config);

/// Answer-grounded loop: extract candidates, pick a_t, generate q_t from the
/// highlighted passage. Stops early when no candidate is available. Agent
/// failures propagate as AgentError.
Conversation simulate_sym(const Document& doc, const Agent& extractor, const Agent& questioner,
                          const SimulationConfig& config);

/// Prior-grounded loop: generate q_t from the background and history only,
/// then let the answer finder answer it against the passage.
Conversation simulate_asym(const Document& doc, const Agent& questioner, const Agent& answerer,
                           const SimulationConfig& config);

enum class DropReason { below_threshold, agent_error };

struct DroppedPair {
    std::string conv_id;
    std::size_t turn_index = 0;  // original index
    DropReason reason = DropReason::below_threshold;
    double f1 = 0.0;
    std::string detail;
};

struct FilterResult {
    Dataset kept;                      // surviving turns renumbered from 1
    std::vector<DroppedPair> dropped;
    std::size_t total_pairs = 0;
    std::size_t kept_pairs = 0;
    double success_rate = 0.0;         // kept_pairs / total_pairs
};

/// Roundtrip filtration: the filter answerer sees (q_t, c, original H_<t);
/// a pair survives when F1(prediction, a_t) >= threshold.
FilterResult roundtrip_filter(const Dataset& dataset, const Agent& filter_answerer, const FilterConfig& config);

/// Two-column table "#(D̂)  %(Success)", one row per named result.
std::string format_filter_report(const std::vector<std::pair<std::string, FilterResult>>& rows);

struct SimulationAgents {
    AgentPtr extractor;   // sym
    AgentPtr questioner;  // sym and asym
    AgentPtr answerer;    // asym
};

struct SimulationFailure {
    std::string doc_id;
    std::string error;
};

struct SimulationReport {
    Dataset conversations;
    std::size_t attempted = 0;
    std::size_t aborted = 0;
    std::map<std::string, std::size_t> turn_counts;  // conv_id -> turns
    std::vector<SimulationFailure> failures;
};

/// Simulates one conversation per document (conv_id = doc_id), ordered by
/// doc_id. Per-document agent failures are counted, never fatal.
SimulationReport run_batch(const std::vector<Document>& documents, const SimulationConfig& config,
                           const SimulationAgents& agents, std::size_t jobs = 1);

/// Run manifest as pretty JSON: config, seed, endpoint identities, counts.
std::string run_manifest(const SimulationConfig& config, const SimulationAgents& agents,
                         const SimulationReport& report, const GenerationConfig& generation,
                         const std::string& created_at);

}  // namespace simseek
