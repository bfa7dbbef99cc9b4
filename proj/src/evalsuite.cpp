#include "simseek/evalsuite.hpp"

#include <algorithm>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace simseek {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

bool is_cannot(std::string_view text) { return trim(text) == kCannotAnswer; }

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (;;) {
        const auto tab = line.find('\t', pos);
        fields.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
        if (tab == std::string::npos) return fields;
        pos = tab + 1;
    }
}

// Calls fn(fields, line_no) for every non-blank, non-comment line.
template <typename Fn>
void for_each_record(std::istream& in, Fn fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        fn(split_tabs(line), line_no);
    }
}

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no); }

}  // namespace

CqaScore cqa_f1(const std::map<std::string, std::string>& predictions, const std::vector<GoldQuestion>& gold) {
    CqaScore score;
    double total = 0.0;
    for (const auto& g : gold) {
        if (g.references.empty()) throw std::invalid_argument("question " + g.question_id + " has no references");
        const auto it = predictions.find(g.question_id);
        double f1 = 0.0;
        if (it == predictions.end()) {
            score.missing.push_back(g.question_id);
        } else {
            std::vector<TokenBag> answerable;
            for (const auto& r : g.references)
                if (!is_cannot(r)) answerable.push_back(normalize(r));
            if (answerable.empty()) {
                f1 = is_cannot(it->second) ? 1.0 : 0.0;
            } else if (!is_cannot(it->second)) {
                f1 = max_f1_over_refs(normalize(it->second), answerable);
            }
        }
        score.per_question[g.question_id] = f1;
        total += f1;
    }
    score.f1 = gold.empty() ? 0.0 : 100.0 * total / static_cast<double>(gold.size());
    return score;
}

HeqScore heq(const std::map<std::string, double>& model_f1, const std::map<std::string, double>& human_f1,
             const std::map<std::string, std::string>& dialogue_of) {
    auto same_keys = [](const auto& a, const auto& b) {
        return a.size() == b.size() &&
               std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) { return x.first == y.first; });
    };
    if (!same_keys(model_f1, human_f1) || !same_keys(model_f1, dialogue_of))
        throw std::invalid_argument("model, human and dialogue question ids do not match");

    HeqScore s;
    std::map<std::string, bool> dialogue_ok;
    std::size_t hits = 0;
    for (const auto& [qid, m] : model_f1) {
        const bool ok = m >= human_f1.at(qid);
        if (ok) ++hits;
        auto [it, _] = dialogue_ok.emplace(dialogue_of.at(qid), true);
        it->second = it->second && ok;
    }
    s.n_questions = model_f1.size();
    s.n_dialogues = dialogue_ok.size();
    if (s.n_questions == 0) return s;
    const auto good_dialogues = std::count_if(dialogue_ok.begin(), dialogue_ok.end(), [](const auto& kv) { return kv.second; });
    s.heq_q = 100.0 * static_cast<double>(hits) / static_cast<double>(s.n_questions);
    s.heq_d = 100.0 * static_cast<double>(good_dialogues) / static_cast<double>(s.n_dialogues);
    return s;
}

std::string question_id(const std::string& conv_id, std::size_t turn) {
    return conv_id + "_q#" + std::to_string(turn - 1);
}

std::vector<GoldQuestion> gold_from_dataset(const Dataset& dataset) {
    std::vector<GoldQuestion> gold;
    for (const auto& conv : dataset.conversations)
        for (const auto& pair : conv.turns)
            gold.push_back({question_id(conv.conv_id, pair.turn_index), conv.conv_id, {pair.answer.text}});
    return gold;
}

std::vector<GoldQuestion> gold_from_quac(std::string_view json_text) {
    using nlohmann::json;
    const json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded() || !root.contains("data")) throw ParseError("$", "not a QuAC file");
    std::vector<GoldQuestion> gold;
    try {
        for (const auto& article : root["data"]) {
            for (const auto& para : article.at("paragraphs")) {
                const std::string dialogue = para.at("id").get<std::string>();
                for (const auto& qa : para.at("qas")) {
                    GoldQuestion g{qa.at("id").get<std::string>(), dialogue, {}};
                    if (qa.contains("answers"))
                        for (const auto& a : qa["answers"]) g.references.push_back(a.at("text").get<std::string>());
                    if (g.references.empty() && qa.contains("orig_answer"))
                        g.references.push_back(qa["orig_answer"].at("text").get<std::string>());
                    gold.push_back(std::move(g));
                }
            }
        }
    } catch (const json::exception& e) {
        throw ParseError("$", e.what());
    }
    return gold;
}

std::map<std::string, std::string> read_predictions(std::istream& in) {
    std::map<std::string, std::string> preds;
    for_each_record(in, [&](const std::vector<std::string>& f, std::size_t n) {
        if (f.size() != 2) throw ParseError(where(n), "expected question_id<TAB>answer");
        if (!preds.emplace(f[0], f[1]).second) throw ParseError(where(n), "duplicate prediction for " + f[0]);
    });
    return preds;
}

std::map<std::string, double> read_scores(std::istream& in) {
    std::map<std::string, double> scores;
    for_each_record(in, [&](const std::vector<std::string>& f, std::size_t n) {
        if (f.size() != 2) throw ParseError(where(n), "expected question_id<TAB>score");
        try {
            scores[f[0]] = std::stod(f[1]);
        } catch (const std::exception&) {
            throw ParseError(where(n), "invalid score");
        }
    });
    return scores;
}

double cae_recall_at_k(const std::vector<CandidateSet>& candidate_sets, const std::vector<std::string>& gold_spans,
                       std::size_t k) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    if (candidate_sets.size() != gold_spans.size())
        throw std::invalid_argument("candidate sets and gold spans differ in length");
    if (gold_spans.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < gold_spans.size(); ++i) {
        const auto gold = normalize(gold_spans[i]).tokens;
        const auto& spans = candidate_sets[i].spans();
        const std::size_t limit = std::min(k, spans.size());
        for (std::size_t r = 0; r < limit; ++r) {
            if (normalize(spans[r].span.text).tokens == gold) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(gold_spans.size());
}

std::string build_retrieval_query(const std::vector<std::string>& questions, std::size_t max_len) {
    if (questions.empty()) throw std::invalid_argument("retrieval query needs at least one question");
    std::vector<std::size_t> kept(questions.size());
    for (std::size_t i = 0; i < kept.size(); ++i) kept[i] = i;

    auto length = [&] {
        std::size_t n = kept.size() - 1;  // [SEP] tokens
        for (auto i : kept) n += whitespace_token_count(questions[i]);
        return n;
    };
    while (kept.size() > 2 && length() > max_len) kept.erase(kept.begin() + 1);

    std::string query;
    for (auto i : kept) {
        if (!query.empty()) query += " [SEP] ";
        query += questions[i];
    }
    return query;
}

namespace {

void check_rankings(const std::vector<RankedRetrieval>& rankings) {
    if (rankings.empty()) throw std::invalid_argument("no rankings to evaluate");
    for (const auto& r : rankings) {
        std::unordered_set<std::string> seen;
        for (const auto& id : r.ranked)
            if (!seen.insert(id).second) throw std::invalid_argument("query " + r.query_id + " ranks " + id + " twice");
    }
}

std::size_t gold_rank(const RankedRetrieval& r) {
    const auto it = std::find(r.ranked.begin(), r.ranked.end(), r.gold);
    return it == r.ranked.end() ? 0 : static_cast<std::size_t>(it - r.ranked.begin()) + 1;
}

}  // namespace

double mrr(const std::vector<RankedRetrieval>& rankings) {
    check_rankings(rankings);
    double sum = 0.0;
    for (const auto& r : rankings)
        if (const auto rank = gold_rank(r)) sum += 1.0 / static_cast<double>(rank);
    return sum / static_cast<double>(rankings.size());
}

double recall_at_k(const std::vector<RankedRetrieval>& rankings, std::size_t k) {
    check_rankings(rankings);
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    std::size_t hits = 0;
    for (const auto& r : rankings) {
        const auto rank = gold_rank(r);
        if (rank != 0 && rank <= k) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

std::vector<RankedRetrieval> read_rankings(std::istream& in) {
    std::vector<RankedRetrieval> out;
    for_each_record(in, [&](const std::vector<std::string>& f, std::size_t n) {
        if (f.size() != 3) throw ParseError(where(n), "expected query_id<TAB>ranked ids<TAB>gold id");
        RankedRetrieval r{f[0], {}, trim(f[2])};
        std::istringstream ids(f[1]);
        for (std::string id; std::getline(ids, id, ',');)
            if (auto t = trim(id); !t.empty()) r.ranked.push_back(std::move(t));
        out.push_back(std::move(r));
    });
    return out;
}

BleuScores intrinsic_bleu_eval(const std::map<TurnKey, std::string>& generated,
                               const std::map<TurnKey, std::string>& gold) {
    std::vector<std::string> missing;
    auto describe = [](const TurnKey& k) { return k.first + "#" + std::to_string(k.second); };
    for (const auto& [k, _] : gold)
        if (!generated.contains(k)) missing.push_back("generated lacks " + describe(k));
    for (const auto& [k, _] : generated)
        if (!gold.contains(k)) missing.push_back("gold lacks " + describe(k));
    if (!missing.empty()) {
        std::string msg = "misaligned question sets:";
        for (const auto& m : missing) msg += " " + m + ";";
        throw std::invalid_argument(msg);
    }
    std::vector<BleuPair> pairs;
    for (const auto& [k, g] : gold) pairs.push_back({bleu_tokenize(generated.at(k)), bleu_tokenize(g)});
    return corpus_bleu(pairs, 4);
}

std::map<TurnKey, std::string> read_turn_questions(std::istream& in) {
    std::map<TurnKey, std::string> out;
    for_each_record(in, [&](const std::vector<std::string>& f, std::size_t n) {
        if (f.size() != 3) throw ParseError(where(n), "expected conv_id<TAB>t<TAB>question");
        std::size_t t = 0;
        try {
            t = std::stoul(f[1]);
        } catch (const std::exception&) {
            throw ParseError(where(n), "invalid turn index");
        }
        if (!out.emplace(TurnKey{f[0], t}, f[2]).second) throw ParseError(where(n), "duplicate turn");
    });
    return out;
}

std::map<TurnKey, std::string> questions_of(const Dataset& dataset) {
    std::map<TurnKey, std::string> out;
    for (const auto& conv : dataset.conversations)
        for (const auto& pair : conv.turns) out[{conv.conv_id, pair.turn_index}] = pair.question;
    return out;
}

}  // namespace simseek
