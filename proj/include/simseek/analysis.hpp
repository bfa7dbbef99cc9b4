#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "simseek/corpus.hpp"

namespace simseek {

/// 1 - max_{i<t} precision(a_t, a_i) over normalized tokens. t is 1-based;
/// throws std::out_of_range outside [1, |turns|].
double informativeness(const Conversation& conv, std::size_t t);

struct StatReport {
    double tokens_per_question = 0.0;
    double tokens_per_answer = 0.0;   // answerable answers only
    double f1_q_a = 0.0;              // percent, answerable pairs only
    double f1_q_prev_answers = 0.0;   // percent, turns t >= 2
    double pct_anything_else = 0.0;
    double pct_unanswerable = 0.0;
    std::size_t n_questions = 0;
    std::size_t n_conversations = 0;
};

/// Throws std::invalid_argument for a dataset without questions.
StatReport dataset_statistics(const Dataset& dataset);

/// Six-row comparison table, one column per dataset.
std::string format_stat_table(const std::vector<std::pair<std::string, StatReport>>& columns);

// ---------------------------------------------------------------------------
// Per-turn curves

/// Returns nullopt (or throws) when it cannot score the pair; the pair is
/// then skipped and counted.
using TurnScorer = std::function<std::optional<double>(const Conversation&, std::size_t t)>;

struct NamedScorer {
    std::string name;
    TurnScorer score;
};

struct TurnPoint {
    std::size_t turn = 0;
    double mean = 0.0;  // NaN when count is zero
    std::size_t count = 0;
};

struct TurnCurve {
    std::string metric;
    std::vector<TurnPoint> points;  // turns 1..max, contiguous
    std::size_t skipped = 0;
};

std::vector<TurnCurve> per_turn_curves(const Dataset& dataset, const std::vector<NamedScorer>& scorers);

NamedScorer informativeness_scorer();

/// Scores read from lines of "conv_id<TAB>t<TAB>score" (p_s / p_r model
/// outputs). Pairs absent from the file are skipped.
class ExternalScores {
public:
    static ExternalScores parse(std::istream& in);
    static ExternalScores load(const std::string& path);

    std::optional<double> lookup(const std::string& conv_id, std::size_t t) const;
    NamedScorer scorer(std::string name) const;
    std::size_t size() const { return scores_.size(); }

private:
    std::map<std::pair<std::string, std::size_t>, double> scores_;
};

/// Tab-separated "metric turn mean count" rows with a header line.
std::string format_curves(const std::vector<TurnCurve>& curves);

// ---------------------------------------------------------------------------
// Classifier training data

enum class ExampleLabel { positive, negative };
enum class NegativeKind { frequent_question, random_question, random_answer };

std::string_view to_string(NegativeKind kind);

struct ClassifierExample {
    std::string conv_id;
    std::size_t turn = 0;
    std::vector<QAPair> history;  // turns before `turn`
    std::string question;
    std::optional<std::string> answer;
    ExampleLabel label = ExampleLabel::positive;
    std::optional<NegativeKind> negative_kind;
};

struct ClassifierData {
    std::vector<ClassifierExample> examples;
    std::size_t fallbacks = 0;  // negatives that could not be drawn and were emitted as positives
    std::vector<std::string> warnings;
};

/// Per (H_t, q_t): positive with probability 0.5; otherwise a negative whose
/// question is a frequent question (occurs more than once in the dataset) or
/// a random question from another conversation, with equal chance.
ClassifierData build_specificity_training_set(const Dataset& dataset, std::uint64_t seed);

/// Per (H_t, q_t, a_t): positive with probability 0.5; otherwise a_t is
/// replaced by a random answer with different text from the same conversation.
ClassifierData build_relevance_training_set(const Dataset& dataset, std::uint64_t seed);

/// One JSON object per example per line.
void write_classifier_data(std::ostream& out, const ClassifierData& data);

}  // namespace simseek
