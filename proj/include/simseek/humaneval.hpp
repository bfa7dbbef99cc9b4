#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "simseek/corpus.hpp"

namespace simseek {

enum class Criterion { adequacy, informativeness, relevance, accuracy };
inline constexpr std::array<Criterion, 4> kCriteria{Criterion::adequacy, Criterion::informativeness,
                                                    Criterion::relevance, Criterion::accuracy};

std::string_view to_string(Criterion c);
Criterion criterion_from_string(std::string_view s);

enum class Side { a, b };

struct Candidate {
    QAPair pair;
    std::string source;  // hidden from annotators
};

struct JudgmentTask {
    std::string task_id;
    Document document;
    std::vector<QAPair> history;
    Candidate candidate_a;
    Candidate candidate_b;
};

/// Samples n aligned positions (same doc_id, turn present in both datasets)
/// without replacement and randomizes left/right per task. The shared
/// history is taken from dataset_a. Throws std::invalid_argument when fewer
/// than n positions exist.
std::vector<JudgmentTask> create_tasks(const Dataset& dataset_a, const Dataset& dataset_b, std::size_t n,
                                       std::uint64_t seed);

/// One JSON line. With include_sources == false the payload carries no
/// source tags and no doc_id (annotator view).
std::string task_to_json(const JudgmentTask& task, bool include_sources);
JudgmentTask task_from_json(std::string_view line);
void write_tasks(std::ostream& out, const std::vector<JudgmentTask>& tasks);
std::vector<JudgmentTask> read_tasks(std::istream& in);
std::vector<JudgmentTask> read_tasks_file(const std::string& path);

struct Vote {
    std::string task_id;
    std::string annotator_id;
    std::map<Criterion, Side> choices;
    std::string timestamp;
};

std::string vote_to_json(const Vote& vote);
Vote vote_from_json(std::string_view line);

/// Strict majority of an odd number of binary votes. Throws
/// std::invalid_argument on an even (or zero) count.
Side majority(std::span<const Side> votes);

/// Bootstrap significance of the observed winner. `x_won[i]` is true when
/// source x won task i. Each of n_samples resamples draws the tasks with
/// replacement; the returned p is twice the fraction of resamples in which
/// the observed winner's share is <= 0.5, capped at 1.
double bootstrap_test(std::span<const bool> x_won, std::size_t n_samples, std::uint64_t seed);

struct ExclusionRules {
    bool exclude_unanswerable = true;
    bool exclude_anything_else = true;
    std::vector<std::string> markers{"other", "else"};
};

/// True when either candidate is unanswerable or an "Anything else?" question.
bool is_excluded(const JudgmentTask& task, const ExclusionRules& rules);

struct ReportOptions {
    ExclusionRules rules;
    std::size_t n_samples = 100000;
    std::uint64_t seed = 0;
    std::size_t panel_size = 5;
    double alpha = 0.1;
};

struct CriterionResult {
    Criterion criterion = Criterion::adequacy;
    double proportion_x = 0.0;  // share of majority wins for source_x
    double proportion_y = 0.0;
    double p_value = 1.0;
    bool significant = false;
    std::size_t n_tasks = 0;
};

struct PairReport {
    std::string source_x;  // lexicographically smaller source name
    std::string source_y;
    std::vector<CriterionResult> criteria;  // empty when every task was excluded
    std::size_t excluded = 0;
    std::size_t pending = 0;  // tasks without an odd, non-zero vote count
};

struct EvalReport {
    std::vector<PairReport> pairs;
};

/// Majority proportions and bootstrap p per criterion and source pair,
/// computed on the votes given (a snapshot of the log).
EvalReport report(const std::vector<JudgmentTask>& tasks, const std::vector<Vote>& votes,
                  const ReportOptions& options);

std::string report_to_json(const EvalReport& report);
std::string format_report(const EvalReport& report);

// ---------------------------------------------------------------------------

enum class SubmitStatus { recorded, duplicate, panel_full };

/// Append-only vote store. Writes are serialized; every accepted vote is
/// written as one line and flushed before submit() returns.
class VoteLog {
public:
    VoteLog() = default;  // in-memory only
    explicit VoteLog(const std::string& path);

    /// Records the vote unless the annotator already voted on the task or the
    /// task already holds max_votes votes. The check and the append are atomic.
    SubmitStatus submit(const Vote& vote, std::size_t max_votes = static_cast<std::size_t>(-1));
    std::vector<Vote> snapshot() const;
    std::size_t votes_for(const std::string& task_id) const;
    bool has_voted(const std::string& task_id, const std::string& annotator_id) const;
    std::set<std::string> annotators() const;

private:
    mutable std::mutex mu_;
    std::string path_;
    std::vector<Vote> votes_;
    std::set<std::tuple<std::string, std::string, Criterion>> keys_;
    std::map<std::string, std::size_t> per_task_;
};

/// HTTP service for the pairwise protocol:
///   GET  /api/session/new            -> {"annotator_id"}
///   GET  /api/tasks/next?annotator=  -> task without source tags, or {"done": true}
///   POST /api/votes                  -> 201 recorded, 200 already recorded, 4xx invalid
///   GET  /api/report                 -> EvalReport JSON
class HumanEvalService {
public:
    HumanEvalService(std::vector<JudgmentTask> tasks, VoteLog& log, ReportOptions options,
                     std::string static_dir = {});
    ~HumanEvalService();

    HumanEvalService(const HumanEvalService&) = delete;
    HumanEvalService& operator=(const HumanEvalService&) = delete;

    /// Binds to host:port (0 picks a free port) and returns the port.
    int bind(const std::string& host, int port);
    void listen();  // blocks until stop()
    void start();   // listen() on a background thread
    void stop();

    std::string new_session();
    std::optional<JudgmentTask> next_task(const std::string& annotator_id) const;
    bool has_task(const std::string& task_id) const;
    EvalReport current_report() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace simseek
