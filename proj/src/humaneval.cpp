#include "simseek/humaneval.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "simseek/random.hpp"
#include "simseek/textnorm.hpp"

namespace simseek {

using nlohmann::json;

std::string_view to_string(Criterion c) {
    switch (c) {
        case Criterion::adequacy: return "adequacy";
        case Criterion::informativeness: return "informativeness";
        case Criterion::relevance: return "relevance";
        case Criterion::accuracy: return "accuracy";
    }
    return "adequacy";
}

Criterion criterion_from_string(std::string_view s) {
    for (auto c : kCriteria)
        if (to_string(c) == s) return c;
    throw std::invalid_argument("unknown criterion: " + std::string(s));
}

// ---------------------------------------------------------------------------
// Tasks

std::vector<JudgmentTask> create_tasks(const Dataset& dataset_a, const Dataset& dataset_b, std::size_t n,
                                       std::uint64_t seed) {
    std::string source_a(to_string(dataset_a.provenance));
    std::string source_b(to_string(dataset_b.provenance));
    if (source_a == source_b) {
        source_a = dataset_a.name;
        source_b = dataset_b.name;
    }
    if (source_a == source_b) throw std::invalid_argument("datasets must come from different sources");

    std::unordered_map<std::string, const Conversation*> by_doc;
    for (const auto& conv : dataset_b.conversations) by_doc.emplace(conv.document.doc_id, &conv);

    struct Position {
        const Conversation* a;
        const Conversation* b;
        std::size_t turn;
    };
    std::vector<Position> positions;
    for (const auto& conv : dataset_a.conversations) {
        const auto it = by_doc.find(conv.document.doc_id);
        if (it == by_doc.end()) continue;
        const std::size_t turns = std::min(conv.turns.size(), it->second->turns.size());
        for (std::size_t t = 1; t <= turns; ++t) positions.push_back({&conv, it->second, t});
    }
    std::stable_sort(positions.begin(), positions.end(), [](const Position& x, const Position& y) {
        return std::tie(x.a->document.doc_id, x.turn) < std::tie(y.a->document.doc_id, y.turn);
    });
    if (positions.empty()) throw std::invalid_argument("the datasets share no aligned (document, turn) positions");
    if (positions.size() < n)
        throw std::invalid_argument("requested " + std::to_string(n) + " tasks but only " +
                                    std::to_string(positions.size()) + " aligned positions are available");

    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + uniform_index(rng, positions.size() - i);
        std::swap(positions[i], positions[j]);
    }

    std::vector<JudgmentTask> tasks;
    tasks.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& pos = positions[i];
        JudgmentTask task;
        std::ostringstream id;
        id << "task-" << std::setw(4) << std::setfill('0') << i + 1;
        task.task_id = id.str();
        task.document = pos.a->document;
        task.history.assign(pos.a->turns.begin(), pos.a->turns.begin() + static_cast<std::ptrdiff_t>(pos.turn - 1));
        Candidate from_a{pos.a->turns[pos.turn - 1], source_a};
        Candidate from_b{pos.b->turns[pos.turn - 1], source_b};
        if (next_unit(rng) < 0.5) std::swap(from_a, from_b);
        task.candidate_a = std::move(from_a);
        task.candidate_b = std::move(from_b);
        tasks.push_back(std::move(task));
    }
    return tasks;
}

namespace {

json pair_json(const QAPair& p) {
    return json{{"t", p.turn_index},
                {"q", p.question},
                {"a", p.answer.text},
                {"start", p.answer.start ? json(*p.answer.start) : json(nullptr)},
                {"unanswerable", p.answer.is_unanswerable}};
}

QAPair pair_from_json(const json& j) {
    QAPair p;
    p.turn_index = j.at("t").get<std::size_t>();
    p.question = j.at("q").get<std::string>();
    p.answer.text = j.at("a").get<std::string>();
    p.answer.is_unanswerable = j.value("unanswerable", p.answer.text == kCannotAnswer);
    if (j.contains("start") && !j["start"].is_null()) p.answer.start = j["start"].get<std::size_t>();
    return p;
}

json candidate_json(const Candidate& c, bool include_sources) {
    json j = pair_json(c.pair);
    if (include_sources) j["source"] = c.source;
    return j;
}

}  // namespace

std::string task_to_json(const JudgmentTask& task, bool include_sources) {
    json history = json::array();
    for (const auto& p : task.history) history.push_back(pair_json(p));
    json doc{{"title", task.document.background.title},
             {"section_title", task.document.background.section_title},
             {"abstract", task.document.background.abstract},
             {"passage", task.document.passage}};
    if (include_sources) doc["doc_id"] = task.document.doc_id;
    json criteria = json::array();
    for (auto c : kCriteria) criteria.push_back(to_string(c));
    json j{{"task_id", task.task_id},
           {"document", std::move(doc)},
           {"history", std::move(history)},
           {"candidate_a", candidate_json(task.candidate_a, include_sources)},
           {"candidate_b", candidate_json(task.candidate_b, include_sources)},
           {"criteria", std::move(criteria)}};
    return j.dump();
}

JudgmentTask task_from_json(std::string_view line) {
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError("task", "invalid JSON");
    try {
        JudgmentTask task;
        task.task_id = j.at("task_id").get<std::string>();
        const auto& d = j.at("document");
        task.document.doc_id = d.value("doc_id", task.task_id);
        task.document.background = {d.at("title").get<std::string>(), d.at("section_title").get<std::string>(),
                                    d.at("abstract").get<std::string>()};
        task.document.passage = d.at("passage").get<std::string>();
        task.document.word_count = whitespace_token_count(task.document.passage);
        for (const auto& p : j.at("history")) task.history.push_back(pair_from_json(p));
        task.candidate_a = {pair_from_json(j.at("candidate_a")), j.at("candidate_a").value("source", "")};
        task.candidate_b = {pair_from_json(j.at("candidate_b")), j.at("candidate_b").value("source", "")};
        return task;
    } catch (const json::exception& e) {
        throw ParseError("task", e.what());
    }
}

void write_tasks(std::ostream& out, const std::vector<JudgmentTask>& tasks) {
    for (const auto& t : tasks) out << task_to_json(t, true) << '\n';
}

std::vector<JudgmentTask> read_tasks(std::istream& in) {
    std::vector<JudgmentTask> tasks;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            tasks.push_back(task_from_json(line));
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no), e.what());
        }
        if (tasks.back().candidate_a.source.empty() || tasks.back().candidate_b.source.empty())
            throw ParseError("line " + std::to_string(line_no), "task file entries need candidate sources");
    }
    return tasks;
}

std::vector<JudgmentTask> read_tasks_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    return read_tasks(in);
}

// ---------------------------------------------------------------------------
// Votes

std::string vote_to_json(const Vote& vote) {
    json choices = json::object();
    for (const auto& [c, side] : vote.choices) choices[std::string(to_string(c))] = side == Side::a ? "A" : "B";
    return json{{"task_id", vote.task_id},
                {"annotator_id", vote.annotator_id},
                {"choices", std::move(choices)},
                {"timestamp", vote.timestamp}}
        .dump();
}

Vote vote_from_json(std::string_view line) {
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("vote", "invalid JSON");
    try {
        Vote v;
        v.task_id = j.at("task_id").get<std::string>();
        v.annotator_id = j.at("annotator_id").get<std::string>();
        v.timestamp = j.value("timestamp", "");
        const auto& choices = j.at("choices");
        if (!choices.is_object()) throw ParseError("vote", "choices must be an object");
        for (const auto& [key, value] : choices.items()) {
            const auto side = value.get<std::string>();
            if (side != "A" && side != "B") throw ParseError("vote", "choice must be \"A\" or \"B\"");
            v.choices[criterion_from_string(key)] = side == "A" ? Side::a : Side::b;
        }
        return v;
    } catch (const json::exception& e) {
        throw ParseError("vote", e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError("vote", e.what());
    }
}

Side majority(std::span<const Side> votes) {
    if (votes.empty() || votes.size() % 2 == 0)
        throw std::invalid_argument("majority needs an odd number of votes, got " + std::to_string(votes.size()));
    const auto a = std::count(votes.begin(), votes.end(), Side::a);
    return 2 * static_cast<std::size_t>(a) > votes.size() ? Side::a : Side::b;
}

double bootstrap_test(std::span<const bool> x_won, std::size_t n_samples, std::uint64_t seed) {
    if (x_won.empty()) throw std::invalid_argument("bootstrap_test needs at least one outcome");
    if (n_samples == 0) throw std::invalid_argument("bootstrap_test needs at least one resample");
    const std::size_t n = x_won.size();
    const std::size_t wins = static_cast<std::size_t>(std::count(x_won.begin(), x_won.end(), true));
    const bool x_leads = 2 * wins >= n;

    Rng rng(seed);
    std::size_t at_or_below_half = 0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        std::size_t c = 0;
        for (std::size_t i = 0; i < n; ++i) c += x_won[uniform_index(rng, n)] ? 1 : 0;
        const std::size_t leader = x_leads ? c : n - c;
        if (2 * leader <= n) ++at_or_below_half;
    }
    const double one_sided = static_cast<double>(at_or_below_half) / static_cast<double>(n_samples);
    return std::min(1.0, 2.0 * one_sided);
}

bool is_excluded(const JudgmentTask& task, const ExclusionRules& rules) {
    for (const Candidate* c : {&task.candidate_a, &task.candidate_b}) {
        if (rules.exclude_unanswerable && is_unanswerable(c->pair.answer)) return true;
        if (rules.exclude_anything_else && is_anything_else(c->pair.question, rules.markers)) return true;
    }
    return false;
}

EvalReport report(const std::vector<JudgmentTask>& tasks, const std::vector<Vote>& votes,
                  const ReportOptions& options) {
    std::unordered_map<std::string, std::vector<const Vote*>> by_task;
    for (const auto& v : votes) by_task[v.task_id].push_back(&v);

    struct Outcomes {
        std::array<std::vector<bool>, kCriteria.size()> x_won;
        std::size_t excluded = 0;
        std::size_t pending = 0;
    };
    std::map<std::pair<std::string, std::string>, Outcomes> groups;

    for (const auto& task : tasks) {
        const bool a_is_x = task.candidate_a.source <= task.candidate_b.source;
        const auto key = a_is_x ? std::make_pair(task.candidate_a.source, task.candidate_b.source)
                                : std::make_pair(task.candidate_b.source, task.candidate_a.source);
        auto& g = groups[key];
        if (is_excluded(task, options.rules)) {
            ++g.excluded;
            continue;
        }
        const auto it = by_task.find(task.task_id);
        const std::size_t n_votes = it == by_task.end() ? 0 : it->second.size();
        if (n_votes == 0 || n_votes % 2 == 0) {
            ++g.pending;
            continue;
        }
        for (std::size_t ci = 0; ci < kCriteria.size(); ++ci) {
            std::vector<Side> sides;
            for (const Vote* v : it->second) sides.push_back(v->choices.at(kCriteria[ci]));
            const bool a_won = majority(sides) == Side::a;
            g.x_won[ci].push_back(a_won == a_is_x);
        }
    }

    EvalReport rep;
    for (const auto& [key, g] : groups) {
        PairReport pr;
        pr.source_x = key.first;
        pr.source_y = key.second;
        pr.excluded = g.excluded;
        pr.pending = g.pending;
        for (std::size_t ci = 0; ci < kCriteria.size(); ++ci) {
            const auto& outcomes = g.x_won[ci];
            if (outcomes.empty()) continue;
            CriterionResult cr;
            cr.criterion = kCriteria[ci];
            cr.n_tasks = outcomes.size();
            const auto wins = std::count(outcomes.begin(), outcomes.end(), true);
            cr.proportion_x = static_cast<double>(wins) / static_cast<double>(cr.n_tasks);
            cr.proportion_y = 1.0 - cr.proportion_x;
            // std::vector<bool> has no contiguous storage to view.
            auto flags = std::make_unique<bool[]>(outcomes.size());
            std::copy(outcomes.begin(), outcomes.end(), flags.get());
            cr.p_value = bootstrap_test(std::span<const bool>(flags.get(), outcomes.size()), options.n_samples,
                                        derive_seed(options.seed, key.first + "|" + key.second + "|" +
                                                                      std::string(to_string(kCriteria[ci]))));
            cr.significant = cr.p_value < options.alpha;
            pr.criteria.push_back(cr);
        }
        rep.pairs.push_back(std::move(pr));
    }
    return rep;
}

std::string report_to_json(const EvalReport& report) {
    json pairs = json::array();
    for (const auto& p : report.pairs) {
        json criteria = json::array();
        for (const auto& c : p.criteria) {
            criteria.push_back({{"criterion", to_string(c.criterion)},
                                {"proportion_x", c.proportion_x},
                                {"proportion_y", c.proportion_y},
                                {"p_value", c.p_value},
                                {"significant", c.significant},
                                {"n_tasks", c.n_tasks}});
        }
        pairs.push_back({{"source_x", p.source_x},
                         {"source_y", p.source_y},
                         {"excluded", p.excluded},
                         {"pending", p.pending},
                         {"criteria", std::move(criteria)}});
    }
    return json{{"pairs", std::move(pairs)}}.dump();
}

std::string format_report(const EvalReport& report) {
    std::ostringstream out;
    for (const auto& p : report.pairs) {
        out << p.source_x << " vs " << p.source_y << "  (excluded " << p.excluded << ", pending " << p.pending
            << ")\n";
        if (p.criteria.empty()) {
            out << "  no surviving tasks\n";
            continue;
        }
        out << "  " << std::left << std::setw(16) << "criterion" << std::right << std::setw(10) << p.source_x.substr(0, 10)
            << std::setw(10) << p.source_y.substr(0, 10) << std::setw(10) << "p" << std::setw(6) << "n" << "  sig\n";
        for (const auto& c : p.criteria) {
            out << "  " << std::left << std::setw(16) << to_string(c.criterion) << std::right << std::fixed
                << std::setprecision(3) << std::setw(10) << c.proportion_x << std::setw(10) << c.proportion_y
                << std::setw(10) << std::setprecision(4) << c.p_value << std::setw(6) << c.n_tasks << "  "
                << (c.significant ? "*" : "") << '\n';
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------

VoteLog::VoteLog(const std::string& path) : path_(path) {
    std::ifstream in(path);
    if (!in) return;  // a fresh log
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Vote v;
        try {
            v = vote_from_json(line);
        } catch (const ParseError&) {
            // A torn final line from a crash mid-write is skipped.
            continue;
        }
        bool dup = false;
        for (const auto& [c, _] : v.choices) dup = dup || keys_.contains({v.task_id, v.annotator_id, c});
        if (dup) continue;
        for (const auto& [c, _] : v.choices) keys_.insert({v.task_id, v.annotator_id, c});
        ++per_task_[v.task_id];
        votes_.push_back(std::move(v));
    }
}

SubmitStatus VoteLog::submit(const Vote& vote, std::size_t max_votes) {
    std::lock_guard lock(mu_);
    for (const auto& [c, _] : vote.choices)
        if (keys_.contains({vote.task_id, vote.annotator_id, c})) return SubmitStatus::duplicate;
    if (const auto it = per_task_.find(vote.task_id); it != per_task_.end() && it->second >= max_votes)
        return SubmitStatus::panel_full;
    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::app | std::ios::binary);
        if (!out) throw std::ios_base::failure("cannot append to vote log " + path_);
        out << vote_to_json(vote) << '\n';
        out.flush();
        if (!out) throw std::ios_base::failure("write failed for vote log " + path_);
    }
    for (const auto& [c, _] : vote.choices) keys_.insert({vote.task_id, vote.annotator_id, c});
    ++per_task_[vote.task_id];
    votes_.push_back(vote);
    return SubmitStatus::recorded;
}

std::vector<Vote> VoteLog::snapshot() const {
    std::lock_guard lock(mu_);
    return votes_;
}

std::size_t VoteLog::votes_for(const std::string& task_id) const {
    std::lock_guard lock(mu_);
    const auto it = per_task_.find(task_id);
    return it == per_task_.end() ? 0 : it->second;
}

bool VoteLog::has_voted(const std::string& task_id, const std::string& annotator_id) const {
    std::lock_guard lock(mu_);
    return keys_.contains({task_id, annotator_id, Criterion::adequacy});
}

std::set<std::string> VoteLog::annotators() const {
    std::lock_guard lock(mu_);
    std::set<std::string> out;
    for (const auto& v : votes_) out.insert(v.annotator_id);
    return out;
}

}  // namespace simseek
