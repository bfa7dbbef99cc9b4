#include "simseek/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "json.hpp"
#include "simseek/random.hpp"
#include "simseek/textnorm.hpp"

namespace simseek {

std::string_view to_string(SimulationMode mode) { return mode == SimulationMode::sym ? "sym" : "asym"; }

SimulationMode mode_from_string(std::string_view s) {
    if (s == "sym") return SimulationMode::sym;
    if (s == "asym") return SimulationMode::asym;
    throw std::invalid_argument("mode must be sym or asym");
}

std::string_view to_string(CandidatePolicy policy) {
    switch (policy) {
        case CandidatePolicy::top1: return "top1";
        case CandidatePolicy::top1_dedup: return "top1-dedup";
        case CandidatePolicy::uniform_random: return "uniform-random";
    }
    return "top1";
}

CandidatePolicy policy_from_string(std::string_view s) {
    if (s == "top1") return CandidatePolicy::top1;
    if (s == "top1-dedup") return CandidatePolicy::top1_dedup;
    if (s == "uniform-random") return CandidatePolicy::uniform_random;
    throw std::invalid_argument("candidate policy must be top1, top1-dedup or uniform-random");
}

void validate(const SimulationConfig& config) {
    if (config.max_turns < 1) throw std::invalid_argument("max_turns must be >= 1");
    if (config.k < 1) throw std::invalid_argument("k must be >= 1");
}

SimulationConfig semi_supervised_config(SimulationMode mode) {
    SimulationConfig cfg;
    cfg.mode = mode;
    cfg.max_turns = 6;
    return cfg;
}

SimulationConfig wiki_config() {
    SimulationConfig cfg;
    cfg.mode = SimulationMode::asym;
    cfg.max_turns = 12;
    cfg.unanswerable_budget = 3;
    return cfg;
}

void validate(const FilterConfig& config) {
    if (!(config.f1_threshold >= 0.0 && config.f1_threshold <= 1.0))
        throw std::invalid_argument("f1_threshold must be in [0, 1]");
}

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Conversation simulate_sym(const Document& doc, const Agent& extractor, const Agent& questioner,
                          const SimulationConfig& config) {
    validate(config);
    Conversation conv{doc.doc_id, doc, {}};
    Rng rng(derive_seed(config.seed, doc.doc_id));
    std::unordered_set<std::string> used;

    for (std::size_t t = 1; t <= config.max_turns; ++t) {
        PromptBundle cae = build_cae_input(doc.passage, conv.turns.empty() ? nullptr : &conv.turns.back());
        cae.turn = t;
        cae.conv_id = conv.conv_id;
        const CandidateSet candidates = to_candidate_set(extractor.invoke(cae), doc.passage, config.k);

        const ScoredSpan* chosen = nullptr;
        switch (config.candidate_policy) {
            case CandidatePolicy::top1:
                if (!candidates.empty()) chosen = &candidates.spans().front();
                break;
            case CandidatePolicy::top1_dedup:
                for (const auto& c : candidates.spans()) {
                    if (!used.contains(c.span.text)) {
                        chosen = &c;
                        break;
                    }
                }
                break;
            case CandidatePolicy::uniform_random:
                if (!candidates.empty()) chosen = &candidates.spans()[uniform_index(rng, candidates.size())];
                break;
        }
        if (!chosen) break;
        used.insert(chosen->span.text);

        PromptBundle cqg = build_cqg_answer_prompt(doc.passage, conv.turns, chosen->span);
        cqg.turn = t;
        cqg.conv_id = conv.conv_id;
        std::string question = trim(first_text(questioner.invoke(cqg)));
        conv.turns.push_back(QAPair{t, std::move(question), chosen->span});
    }
    return conv;
}

Conversation simulate_asym(const Document& doc, const Agent& questioner, const Agent& answerer,
                           const SimulationConfig& config) {
    validate(config);
    Conversation conv{doc.doc_id, doc, {}};
    std::size_t unanswerable = 0;

    for (std::size_t t = 1; t <= config.max_turns; ++t) {
        PromptBundle cqg = build_cqg_prior_prompt(doc.background, conv.turns);
        cqg.turn = t;
        cqg.conv_id = conv.conv_id;
        std::string question = trim(first_text(questioner.invoke(cqg)));

        PromptBundle caf = build_caf_input(question, doc.passage, conv.turns, doc.background);
        caf.turn = t;
        caf.conv_id = conv.conv_id;
        AnswerSpan answer = to_answer_span(answerer.invoke(caf), doc.passage);

        const bool cannot = answer.is_unanswerable;
        conv.turns.push_back(QAPair{t, std::move(question), std::move(answer)});
        if (cannot) ++unanswerable;
        if (config.unanswerable_budget && unanswerable > *config.unanswerable_budget) break;
    }
    return conv;
}

FilterResult roundtrip_filter(const Dataset& dataset, const Agent& filter_answerer, const FilterConfig& config) {
    validate(config);
    FilterResult result;
    result.kept.name = dataset.name;
    result.kept.provenance = dataset.provenance;

    for (const auto& conv : dataset.conversations) {
        Conversation kept{conv.conv_id, conv.document, {}};
        for (std::size_t i = 0; i < conv.turns.size(); ++i) {
            const QAPair& pair = conv.turns[i];
            ++result.total_pairs;
            const std::span<const QAPair> history(conv.turns.data(), i);
            PromptBundle bundle = build_caf_input(pair.question, conv.document.passage, history,
                                                  conv.document.background);
            bundle.conv_id = conv.conv_id;

            std::string prediction;
            try {
                const AgentResponse response = filter_answerer.invoke(bundle);
                if (response.outputs.empty()) throw ProtocolError("reply has no outputs");
                prediction = response.outputs.front().text;
            } catch (const std::exception& e) {
                result.dropped.push_back({conv.conv_id, pair.turn_index, DropReason::agent_error, 0.0, e.what()});
                continue;
            }
            const double f1 = token_f1(normalize(prediction), normalize(pair.answer.text));
            if (config.drop_below && f1 < config.f1_threshold) {
                result.dropped.push_back({conv.conv_id, pair.turn_index, DropReason::below_threshold, f1, prediction});
                continue;
            }
            QAPair copy = pair;
            copy.turn_index = kept.turns.size() + 1;
            kept.turns.push_back(std::move(copy));
        }
        result.kept_pairs += kept.turns.size();
        result.kept.conversations.push_back(std::move(kept));
    }
    result.success_rate = result.total_pairs == 0
                              ? 0.0
                              : static_cast<double>(result.kept_pairs) / static_cast<double>(result.total_pairs);
    return result;
}

std::string format_filter_report(const std::vector<std::pair<std::string, FilterResult>>& rows) {
    std::size_t name_w = 7;
    for (const auto& [name, _] : rows) name_w = std::max(name_w, name.size());
    std::ostringstream out;
    // "#(D̂)" is five columns wide but six bytes long.
    out << std::left << std::setw(static_cast<int>(name_w)) << "dataset" << "  " << std::right << std::setw(9)
        << "#(D\xCC\x82)" << "  " << std::setw(10) << "%(Success)" << '\n';
    for (const auto& [name, r] : rows) {
        out << std::left << std::setw(static_cast<int>(name_w)) << name << "  " << std::right << std::setw(8)
            << r.kept_pairs << "  " << std::setw(10) << std::fixed << std::setprecision(1) << r.success_rate * 100.0
            << '\n';
    }
    return out.str();
}

SimulationReport run_batch(const std::vector<Document>& documents, const SimulationConfig& config,
                           const SimulationAgents& agents, std::size_t jobs) {
    validate(config);
    if (config.mode == SimulationMode::sym && (!agents.extractor || !agents.questioner))
        throw std::invalid_argument("sym simulation needs an extractor and a questioner");
    if (config.mode == SimulationMode::asym && (!agents.questioner || !agents.answerer))
        throw std::invalid_argument("asym simulation needs a questioner and an answerer");

    std::vector<std::size_t> order(documents.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return documents[a].doc_id < documents[b].doc_id; });
    for (std::size_t i = 1; i < order.size(); ++i)
        if (documents[order[i]].doc_id == documents[order[i - 1]].doc_id)
            throw std::invalid_argument("duplicate doc_id " + documents[order[i]].doc_id);

    std::vector<std::optional<Conversation>> results(order.size());
    std::vector<std::string> errors(order.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < order.size(); i = next++) {
            const Document& doc = documents[order[i]];
            try {
                results[i] = config.mode == SimulationMode::sym
                                 ? simulate_sym(doc, *agents.extractor, *agents.questioner, config)
                                 : simulate_asym(doc, *agents.questioner, *agents.answerer, config);
            } catch (const std::exception& e) {
                errors[i] = e.what();
                if (errors[i].empty()) errors[i] = "unknown error";
            }
        }
    };

    const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, order.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }

    SimulationReport report;
    report.conversations.name = "simseek-" + std::string(to_string(config.mode));
    report.conversations.provenance =
        config.mode == SimulationMode::sym ? Provenance::synthetic_sym : Provenance::synthetic_asym;
    report.attempted = order.size();
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (results[i]) {
            report.turn_counts[results[i]->conv_id] = results[i]->turns.size();
            report.conversations.conversations.push_back(std::move(*results[i]));
        } else {
            ++report.aborted;
            report.failures.push_back({documents[order[i]].doc_id, errors[i]});
        }
    }
    return report;
}

std::string run_manifest(const SimulationConfig& config, const SimulationAgents& agents,
                         const SimulationReport& report, const GenerationConfig& generation,
                         const std::string& created_at) {
    using nlohmann::json;
    auto ident = [](const AgentPtr& a) { return a ? json(a->identity()) : json(nullptr); };
    json failures = json::array();
    for (const auto& f : report.failures) failures.push_back({{"doc_id", f.doc_id}, {"error", f.error}});
    json manifest{
        {"config",
         {{"mode", to_string(config.mode)},
          {"max_turns", config.max_turns},
          {"unanswerable_budget", config.unanswerable_budget ? json(*config.unanswerable_budget) : json(nullptr)},
          {"k", config.k},
          {"candidate_policy", to_string(config.candidate_policy)}}},
        {"seed", config.seed},
        {"generation",
         {{"beam_size", generation.beam_size},
          {"top_p", generation.top_p},
          {"temperature", generation.temperature},
          {"max_new_tokens", generation.max_new_tokens}}},
        {"agents",
         {{"extractor", ident(agents.extractor)},
          {"questioner", ident(agents.questioner)},
          {"answerer", ident(agents.answerer)}}},
        {"counts",
         {{"attempted", report.attempted},
          {"aborted", report.aborted},
          {"conversations", report.conversations.conversations.size()},
          {"turns", std::accumulate(report.turn_counts.begin(), report.turn_counts.end(), std::size_t{0},
                                    [](std::size_t acc, const auto& kv) { return acc + kv.second; })}}},
        {"failures", std::move(failures)},
        {"created_at", created_at}};
    return manifest.dump(2);
}

}  // namespace simseek
