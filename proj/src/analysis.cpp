#include "simseek/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "simseek/random.hpp"
#include "simseek/textnorm.hpp"

namespace simseek {

double informativeness(const Conversation& conv, std::size_t t) {
    if (t < 1 || t > conv.turns.size())
        throw std::out_of_range("turn " + std::to_string(t) + " out of range for conversation " + conv.conv_id);
    const TokenBag current = normalize(conv.turns[t - 1].answer.text);
    double max_precision = 0.0;
    for (std::size_t i = 0; i + 1 < t; ++i)
        max_precision = std::max(max_precision, token_precision(current, normalize(conv.turns[i].answer.text)));
    return 1.0 - max_precision;
}

StatReport dataset_statistics(const Dataset& dataset) {
    StatReport r;
    r.n_conversations = dataset.conversations.size();

    double q_tokens = 0, a_tokens = 0, f1_qa = 0, f1_prev = 0;
    std::size_t answerable = 0, with_prev = 0, anything_else = 0, unanswerable = 0;
    for (const auto& conv : dataset.conversations) {
        TokenBag previous;  // answerable answers so far, concatenated
        for (std::size_t i = 0; i < conv.turns.size(); ++i) {
            const auto& pair = conv.turns[i];
            ++r.n_questions;
            q_tokens += static_cast<double>(whitespace_token_count(pair.question));
            if (is_anything_else(pair.question)) ++anything_else;
            const TokenBag q = normalize(pair.question);
            if (i > 0) {
                f1_prev += token_f1(q, previous);
                ++with_prev;
            }
            if (is_unanswerable(pair.answer)) {
                ++unanswerable;
                continue;
            }
            ++answerable;
            a_tokens += static_cast<double>(whitespace_token_count(pair.answer.text));
            const TokenBag a = normalize(pair.answer.text);
            f1_qa += token_f1(q, a);
            previous.tokens.insert(previous.tokens.end(), a.tokens.begin(), a.tokens.end());
        }
    }
    if (r.n_questions == 0) throw std::invalid_argument("dataset " + dataset.name + " has no questions");

    const auto n = static_cast<double>(r.n_questions);
    r.tokens_per_question = q_tokens / n;
    r.tokens_per_answer = answerable ? a_tokens / static_cast<double>(answerable) : 0.0;
    r.f1_q_a = answerable ? 100.0 * f1_qa / static_cast<double>(answerable) : 0.0;
    r.f1_q_prev_answers = with_prev ? 100.0 * f1_prev / static_cast<double>(with_prev) : 0.0;
    r.pct_anything_else = 100.0 * static_cast<double>(anything_else) / n;
    r.pct_unanswerable = 100.0 * static_cast<double>(unanswerable) / n;
    return r;
}

std::string format_stat_table(const std::vector<std::pair<std::string, StatReport>>& columns) {
    struct Row {
        const char* label;
        double StatReport::*field;
    };
    static const Row rows[] = {
        {"tokens / question", &StatReport::tokens_per_question},
        {"tokens / answer", &StatReport::tokens_per_answer},
        {"F1 of (q_t, a_t)", &StatReport::f1_q_a},
        {"F1 of (q_t, a_0:(t-1))", &StatReport::f1_q_prev_answers},
        {"% Anything else?", &StatReport::pct_anything_else},
        {"% Unanswerable Qs", &StatReport::pct_unanswerable},
    };
    std::size_t label_w = 22;
    std::size_t col_w = 10;
    for (const auto& [name, _] : columns) col_w = std::max(col_w, name.size());

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(label_w)) << "statistic";
    for (const auto& [name, _] : columns) out << "  " << std::right << std::setw(static_cast<int>(col_w)) << name;
    out << '\n';
    for (const auto& row : rows) {
        out << std::left << std::setw(static_cast<int>(label_w)) << row.label;
        for (const auto& [_, rep] : columns)
            out << "  " << std::right << std::setw(static_cast<int>(col_w)) << std::fixed << std::setprecision(1)
                << rep.*(row.field);
        out << '\n';
    }
    out << std::left << std::setw(static_cast<int>(label_w)) << "# questions";
    for (const auto& [_, rep] : columns) out << "  " << std::right << std::setw(static_cast<int>(col_w)) << rep.n_questions;
    out << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------

std::vector<TurnCurve> per_turn_curves(const Dataset& dataset, const std::vector<NamedScorer>& scorers) {
    std::size_t max_turns = 0;
    for (const auto& conv : dataset.conversations) max_turns = std::max(max_turns, conv.turns.size());

    std::vector<TurnCurve> curves;
    for (const auto& scorer : scorers) {
        TurnCurve curve;
        curve.metric = scorer.name;
        std::vector<double> sums(max_turns, 0.0);
        std::vector<std::size_t> counts(max_turns, 0);
        for (const auto& conv : dataset.conversations) {
            for (std::size_t t = 1; t <= conv.turns.size(); ++t) {
                std::optional<double> s;
                try {
                    s = scorer.score(conv, t);
                } catch (const std::exception&) {
                    s.reset();
                }
                if (!s || !std::isfinite(*s)) {
                    ++curve.skipped;
                    continue;
                }
                sums[t - 1] += *s;
                ++counts[t - 1];
            }
        }
        for (std::size_t t = 0; t < max_turns; ++t) {
            curve.points.push_back({t + 1,
                                    counts[t] ? sums[t] / static_cast<double>(counts[t])
                                              : std::numeric_limits<double>::quiet_NaN(),
                                    counts[t]});
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

NamedScorer informativeness_scorer() {
    return {"informativeness", [](const Conversation& c, std::size_t t) -> std::optional<double> {
                return informativeness(c, t);
            }};
}

ExternalScores ExternalScores::parse(std::istream& in) {
    ExternalScores scores;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::istringstream fields(line);
        std::string conv_id, t_str, score_str;
        if (!std::getline(fields, conv_id, '\t') || !std::getline(fields, t_str, '\t') ||
            !std::getline(fields, score_str, '\t'))
            throw ParseError("line " + std::to_string(line_no), "expected conv_id<TAB>t<TAB>score");
        try {
            std::size_t used = 0;
            const auto t = std::stoul(t_str, &used);
            if (used != t_str.size() || t == 0) throw std::invalid_argument("turn");
            const double s = std::stod(score_str, &used);
            if (used != score_str.size()) throw std::invalid_argument("score");
            scores.scores_[{conv_id, t}] = s;
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(line_no), "invalid turn index or score");
        }
    }
    return scores;
}

ExternalScores ExternalScores::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    return parse(in);
}

std::optional<double> ExternalScores::lookup(const std::string& conv_id, std::size_t t) const {
    const auto it = scores_.find({conv_id, t});
    if (it == scores_.end()) return std::nullopt;
    return it->second;
}

NamedScorer ExternalScores::scorer(std::string name) const {
    return {std::move(name), [this](const Conversation& c, std::size_t t) { return lookup(c.conv_id, t); }};
}

std::string format_curves(const std::vector<TurnCurve>& curves) {
    std::ostringstream out;
    out << "metric\tturn\tmean\tcount\n";
    for (const auto& curve : curves) {
        for (const auto& p : curve.points) {
            out << curve.metric << '\t' << p.turn << '\t';
            if (std::isnan(p.mean)) {
                out << "nan";
            } else {
                out << std::fixed << std::setprecision(6) << p.mean;
            }
            out << '\t' << p.count << '\n';
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------

std::string_view to_string(NegativeKind kind) {
    switch (kind) {
        case NegativeKind::frequent_question: return "frequent_question";
        case NegativeKind::random_question: return "random_question";
        case NegativeKind::random_answer: return "random_answer";
    }
    return "random_question";
}

namespace {

ClassifierExample base_example(const Conversation& conv, std::size_t i) {
    ClassifierExample ex;
    ex.conv_id = conv.conv_id;
    ex.turn = conv.turns[i].turn_index;
    ex.history.assign(conv.turns.begin(), conv.turns.begin() + static_cast<std::ptrdiff_t>(i));
    ex.question = conv.turns[i].question;
    return ex;
}

}  // namespace

ClassifierData build_specificity_training_set(const Dataset& dataset, std::uint64_t seed) {
    ClassifierData data;
    Rng rng(seed);

    // Flat question list with per-conversation ranges, so "a question from
    // another conversation" is one draw over the complement of a range.
    std::vector<const std::string*> flat;
    std::vector<std::size_t> offset;
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& conv : dataset.conversations) {
        offset.push_back(flat.size());
        for (const auto& pair : conv.turns) {
            flat.push_back(&pair.question);
            ++counts[pair.question];
        }
    }
    std::vector<std::string> pool;  // frequent questions, by first occurrence
    std::unordered_map<std::string, std::size_t> pool_pos;
    for (const auto* q : flat) {
        if (counts[*q] > 1 && !pool_pos.contains(*q)) {
            pool_pos.emplace(*q, pool.size());
            pool.push_back(*q);
        }
    }
    if (pool.empty()) data.warnings.push_back("no question occurs more than once; using random-question negatives only");
    if (dataset.conversations.size() < 2)
        data.warnings.push_back("single conversation; random-question negatives come from the same conversation");

    for (std::size_t c = 0; c < dataset.conversations.size(); ++c) {
        const auto& conv = dataset.conversations[c];
        for (std::size_t i = 0; i < conv.turns.size(); ++i) {
            ClassifierExample ex = base_example(conv, i);
            if (next_unit(rng) < 0.5) {
                data.examples.push_back(std::move(ex));
                continue;
            }
            bool frequent = next_unit(rng) < 0.5;
            if (frequent) {
                const auto own = pool_pos.find(ex.question);
                const std::size_t available = pool.size() - (own != pool_pos.end() ? 1 : 0);
                if (available == 0) {
                    frequent = false;
                } else {
                    std::size_t j = uniform_index(rng, available);
                    if (own != pool_pos.end() && j >= own->second) ++j;
                    ex.question = pool[j];
                    ex.label = ExampleLabel::negative;
                    ex.negative_kind = NegativeKind::frequent_question;
                }
            }
            if (!frequent) {
                const std::size_t begin = offset[c];
                const std::size_t len = conv.turns.size();
                const std::size_t others = flat.size() - len;
                std::optional<std::size_t> pick;
                if (others > 0) {
                    std::size_t j = uniform_index(rng, others);
                    if (j >= begin) j += len;
                    pick = j;
                } else if (len > 1) {
                    std::size_t j = uniform_index(rng, len - 1);
                    if (j >= i) ++j;
                    pick = begin + j;
                }
                if (!pick) {
                    ++data.fallbacks;
                    data.examples.push_back(std::move(ex));
                    continue;
                }
                ex.question = *flat[*pick];
                ex.label = ExampleLabel::negative;
                ex.negative_kind = NegativeKind::random_question;
            }
            data.examples.push_back(std::move(ex));
        }
    }
    return data;
}

ClassifierData build_relevance_training_set(const Dataset& dataset, std::uint64_t seed) {
    ClassifierData data;
    Rng rng(seed);
    for (const auto& conv : dataset.conversations) {
        for (std::size_t i = 0; i < conv.turns.size(); ++i) {
            ClassifierExample ex = base_example(conv, i);
            ex.answer = conv.turns[i].answer.text;
            if (next_unit(rng) < 0.5) {
                data.examples.push_back(std::move(ex));
                continue;
            }
            std::vector<std::size_t> alternatives;
            for (std::size_t j = 0; j < conv.turns.size(); ++j)
                if (j != i && conv.turns[j].answer.text != conv.turns[i].answer.text) alternatives.push_back(j);
            if (alternatives.empty()) {
                ++data.fallbacks;
                data.examples.push_back(std::move(ex));
                continue;
            }
            ex.answer = conv.turns[alternatives[uniform_index(rng, alternatives.size())]].answer.text;
            ex.label = ExampleLabel::negative;
            ex.negative_kind = NegativeKind::random_answer;
            data.examples.push_back(std::move(ex));
        }
    }
    if (data.fallbacks > 0)
        data.warnings.push_back(std::to_string(data.fallbacks) +
                                " negatives had no alternative answer and were emitted as positives");
    return data;
}

void write_classifier_data(std::ostream& out, const ClassifierData& data) {
    using nlohmann::json;
    for (const auto& ex : data.examples) {
        json history = json::array();
        for (const auto& p : ex.history) history.push_back({{"t", p.turn_index}, {"q", p.question}, {"a", p.answer.text}});
        json j{{"conv_id", ex.conv_id},
               {"t", ex.turn},
               {"history", std::move(history)},
               {"question", ex.question},
               {"answer", ex.answer ? json(*ex.answer) : json(nullptr)},
               {"label", ex.label == ExampleLabel::positive ? "positive" : "negative"},
               {"negative_kind", ex.negative_kind ? json(to_string(*ex.negative_kind)) : json(nullptr)}};
        out << j.dump() << '\n';
    }
}

}  // namespace simseek
