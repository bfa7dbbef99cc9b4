#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "simseek/agents.hpp"
#include "simseek/corpus.hpp"
#include "simseek/textnorm.hpp"

namespace simseek {

// ---------------------------------------------------------------------------
// Conversational QA accuracy

struct GoldQuestion {
    std::string question_id;
    std::string dialogue_id;
    std::vector<std::string> references;  // may contain CANNOTANSWER
};

struct CqaScore {
    double f1 = 0.0;                                 // macro average, percent
    std::map<std::string, double> per_question;      // in [0, 1]
    std::vector<std::string> missing;                // gold ids without a prediction (scored 0)
};

/// Per question: when every reference is CANNOTANSWER the score is 1 iff the
/// prediction is CANNOTANSWER; otherwise the max token F1 over the
/// answerable references. Throws std::invalid_argument on a question
/// without references.
CqaScore cqa_f1(const std::map<std::string, std::string>& predictions, const std::vector<GoldQuestion>& gold);

struct HeqScore {
    double heq_q = 0.0;  // percent of questions with model F1 >= human F1
    double heq_d = 0.0;  // percent of dialogues where every question satisfies HEQ
    std::size_t n_questions = 0;
    std::size_t n_dialogues = 0;
};

/// Throws std::invalid_argument when the id sets of the three maps differ.
HeqScore heq(const std::map<std::string, double>& model_f1, const std::map<std::string, double>& human_f1,
             const std::map<std::string, std::string>& dialogue_of);

/// Question ids follow the QuAC convention "<conv_id>_q#<t-1>".
std::string question_id(const std::string& conv_id, std::size_t turn);

/// Gold from a canonical dataset: one reference per question.
std::vector<GoldQuestion> gold_from_dataset(const Dataset& dataset);

/// Gold from the QuAC distribution JSON: every listed answer is a reference.
std::vector<GoldQuestion> gold_from_quac(std::string_view json_text);

/// Lines of "question_id<TAB>answer_text".
std::map<std::string, std::string> read_predictions(std::istream& in);
/// Lines of "question_id<TAB>f1".
std::map<std::string, double> read_scores(std::istream& in);

// ---------------------------------------------------------------------------
// Extractor recall

/// Fraction of questions whose gold span (compared after normalization)
/// appears in the top k candidates. Throws on k == 0 or size mismatch.
double cae_recall_at_k(const std::vector<CandidateSet>& candidate_sets, const std::vector<std::string>& gold_spans,
                       std::size_t k);

// ---------------------------------------------------------------------------
// Conversational retrieval

/// "q1 [SEP] q2 ... [SEP] q_t". When longer than max_len whitespace tokens,
/// interior questions are dropped oldest first; q1 and q_t are always kept.
std::string build_retrieval_query(const std::vector<std::string>& questions, std::size_t max_len = 128);

struct RankedRetrieval {
    std::string query_id;
    std::vector<std::string> ranked;
    std::string gold;
};

/// Mean reciprocal rank; an absent gold contributes 0. Throws on empty input
/// or duplicate ids within a ranking.
double mrr(const std::vector<RankedRetrieval>& rankings);
double recall_at_k(const std::vector<RankedRetrieval>& rankings, std::size_t k);

/// Lines of "query_id<TAB>id1,id2,...<TAB>gold_id".
std::vector<RankedRetrieval> read_rankings(std::istream& in);

// ---------------------------------------------------------------------------
// Intrinsic question-generation BLEU

using TurnKey = std::pair<std::string, std::size_t>;  // (conv_id, t)

/// Corpus BLEU-1..4 over aligned generated/gold questions. Throws
/// std::invalid_argument listing ids present on only one side.
BleuScores intrinsic_bleu_eval(const std::map<TurnKey, std::string>& generated,
                               const std::map<TurnKey, std::string>& gold);

/// Lines of "conv_id<TAB>t<TAB>question".
std::map<TurnKey, std::string> read_turn_questions(std::istream& in);
std::map<TurnKey, std::string> questions_of(const Dataset& dataset);

}  // namespace simseek
