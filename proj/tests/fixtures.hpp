#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "simseek/corpus.hpp"

namespace fixtures {

inline simseek::Document doc(const std::string& id, const std::string& passage, const std::string& title = "Title",
                             const std::string& section = "Section", const std::string& abstract = "Abstract.") {
    return simseek::make_document(id, {title, section, abstract}, passage);
}

// Answers are located in the passage by first occurrence; "CANNOTANSWER"
// becomes the unanswerable span.
inline simseek::Conversation conv(const std::string& id, const std::string& passage,
                                  const std::vector<std::pair<std::string, std::string>>& turns) {
    simseek::Conversation c;
    c.conv_id = id;
    c.document = doc(id, passage);
    std::size_t t = 1;
    for (const auto& [q, a] : turns) {
        simseek::QAPair p;
        p.turn_index = t++;
        p.question = q;
        if (a == "CANNOTANSWER") {
            p.answer = simseek::AnswerSpan::unanswerable();
        } else {
            const auto pos = passage.find(a);
            if (pos == std::string::npos) throw std::invalid_argument("fixture answer not in passage: " + a);
            p.answer = simseek::AnswerSpan::at(a, pos);
        }
        c.turns.push_back(std::move(p));
    }
    return c;
}

inline simseek::Dataset dataset(std::vector<simseek::Conversation> convs, const std::string& name = "fixture",
                                simseek::Provenance prov = simseek::Provenance::imported) {
    simseek::Dataset d;
    d.name = name;
    d.provenance = prov;
    d.conversations = std::move(convs);
    return d;
}

// Three hand-written conversations covering unanswerable turns, markers,
// punctuation, articles and repeated answers.
inline simseek::Dataset stats_fixture() {
    const std::string p1 =
        "The band formed in 1990 in Leeds. Their first album sold well. The singer left the band in 1995. "
        "They reunited for a tour.";
    const std::string p2 = "Marie studied physics in Paris. She won the Nobel Prize twice. Her daughter also won it.";
    const std::string p3 = "The bridge opened in 1932. It carries eight lanes.";
    return dataset({
        conv("band", p1,
             {{"When did the band form?", "in 1990 in Leeds"},
              {"Did their first album sell?", "Their first album sold well."},
              {"Any other members leave?", "The singer left the band in 1995."},
              {"Did they ever reunite, the band?", "They reunited for a tour."},
              {"What else happened?", "CANNOTANSWER"}}),
        conv("curie", p2,
             {{"Where did Marie study physics?", "Paris"},
              {"What prizes did she win?", "She won the Nobel Prize twice."},
              {"Did she have children?", "CANNOTANSWER"},
              {"Did her daughter win the prize?", "Her daughter also won it."}}),
        conv("bridge", p3, {{"When did the bridge open?", "1932"}}),
    });
}

inline const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> v{"alpha", "beta", "gamma", "delta", "the", "a", "echo", "fox", "golf",
                                            "hotel", "india", "juliet", "kilo", "lima", "mike"};
    return v;
}

inline std::vector<std::string> random_words(std::mt19937_64& g, std::size_t min_len, std::size_t max_len,
                                             std::size_t vocab = 0) {
    const auto& v = vocabulary();
    if (vocab == 0 || vocab > v.size()) vocab = v.size();
    std::uniform_int_distribution<std::size_t> len(min_len, max_len), word(0, vocab - 1);
    std::vector<std::string> out(len(g));
    for (auto& w : out) w = v[word(g)];
    return out;
}

inline std::string join(const std::vector<std::string>& words, const std::string& sep = " ") {
    std::string s;
    for (std::size_t i = 0; i < words.size(); ++i) s += (i ? sep : "") + words[i];
    return s;
}

// Random conversation whose answers are sentences of its own passage.
inline simseek::Conversation random_conversation(std::mt19937_64& g, const std::string& id, std::size_t turns,
                                                 double unanswerable_rate = 0.2) {
    std::vector<std::string> sentences;
    std::string passage;
    for (std::size_t i = 0; i < turns + 2; ++i) {
        auto s = join(random_words(g, 1, 6, 8)) + ".";
        sentences.push_back(s);
        passage += (i ? " " : "") + s;
    }
    std::vector<std::pair<std::string, std::string>> qa;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, sentences.size() - 1);
    for (std::size_t t = 0; t < turns; ++t) {
        const auto q = join(random_words(g, 1, 5)) + "?";
        qa.emplace_back(q, u(g) < unanswerable_rate ? "CANNOTANSWER" : sentences[pick(g)]);
    }
    return conv(id, passage, qa);
}

}  // namespace fixtures
