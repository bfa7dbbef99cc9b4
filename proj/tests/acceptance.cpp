// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "simseek/agents.hpp"
#include "simseek/analysis.hpp"
#include "simseek/evalsuite.hpp"
#include "simseek/humaneval.hpp"
#include "simseek/mock_agent_server.hpp"
#include "simseek/simulator.hpp"
#include "simseek/textnorm.hpp"

using namespace simseek;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

class Check {
public:
    explicit Check(std::string name) : name_(std::move(name)) {}

    void expect(bool ok, const std::string& what) {
        if (!ok) failures_.push_back(what);
    }
    void note(std::string n) { notes_.push_back(std::move(n)); }
    bool ok() const { return failures_.empty(); }

    void print(std::ostream& out) const {
        out << (ok() ? "PASS" : "FAIL") << "  " << name_;
        for (const auto& n : notes_) out << "  [" << n << "]";
        out << '\n';
        for (const auto& f : failures_) out << "      - " << f << '\n';
    }

private:
    std::string name_;
    std::vector<std::string> failures_;
    std::vector<std::string> notes_;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

class FnAgent final : public Agent {
public:
    explicit FnAgent(std::function<AgentResponse(const PromptBundle&)> fn) : fn_(std::move(fn)) {}
    AgentResponse invoke(const PromptBundle& b) const override { return fn_(b); }
    std::string identity() const override { return "acceptance:fn"; }

private:
    std::function<AgentResponse(const PromptBundle&)> fn_;
};

AgentResponse text_reply(const std::string& s) { return AgentResponse{{AgentOutput{s, std::nullopt, 1.0}}, {}}; }

const std::string kPassage =
    "Keaton was born in Kansas. He joined his parents in the act. The Three Keatons toured widely. "
    "He later moved to film. His stunts became famous. He directed The General. He worked into the sixties.";

std::vector<Document> documents(std::size_t n) {
    std::vector<Document> docs;
    for (std::size_t i = 0; i < n; ++i)
        docs.push_back(fixtures::doc("doc-" + std::to_string(1000 + i), kPassage, "Buster Keaton",
                                     "Career " + std::to_string(i), "An American actor."));
    return docs;
}

std::string canonical(const Dataset& d) {
    std::ostringstream out;
    write_canonical(out, d);
    return out.str();
}

TokenBag bag(const oracle::Tokens& t) { return TokenBag(t); }

// ---------------------------------------------------------------------------

Check metric_oracles() {
    Check c("metric oracles: token_f1, token_precision, max_f1_over_refs, BLEU-1..4 vs brute force");
    const auto start = Clock::now();
    std::mt19937_64 g(20240601);
    std::size_t cases = 0;
    for (int i = 0; i < 500; ++i) {
        const auto a = fixtures::random_words(g, 0, 12, 6);
        const auto b = fixtures::random_words(g, 0, 12, 6);
        const auto na = oracle::norm(fixtures::join(a)), nb = oracle::norm(fixtures::join(b));
        const auto ta = normalize(fixtures::join(a)), tb = normalize(fixtures::join(b));
        c.expect(ta.tokens == na, "normalize differs on case " + std::to_string(i));
        c.expect(std::abs(token_f1(ta, tb) - oracle::f1(na, nb)) <= 1e-12, "token_f1 case " + std::to_string(i));
        c.expect(std::abs(token_precision(ta, tb) - oracle::precision(na, nb)) <= 1e-12,
                 "token_precision case " + std::to_string(i));

        std::vector<oracle::Tokens> refs;
        std::vector<TokenBag> ref_bags;
        for (int r = 0; r < 1 + i % 4; ++r) {
            refs.push_back(oracle::norm(fixtures::join(fixtures::random_words(g, 1, 10, 6))));
            ref_bags.push_back(bag(refs.back()));
        }
        c.expect(std::abs(max_f1_over_refs(ta, ref_bags) - oracle::max_f1(na, refs)) <= 1e-12,
                 "max_f1_over_refs case " + std::to_string(i));

        const auto cand = fixtures::random_words(g, 1, 14, 4);
        const auto ref = fixtures::random_words(g, 1, 14, 4);
        const auto got = bleu(cand, ref, 4);
        const auto want = oracle::bleu({{cand, ref}}, 4);
        for (int n = 0; n < 4; ++n) {
            c.expect(std::abs(got.bleu[n] - want.b[n]) <= 1e-12,
                     "BLEU-" + std::to_string(n + 1) + " case " + std::to_string(i) + ": " + fmt(got.bleu[n]) +
                         " vs " + fmt(want.b[n]));
            c.expect(std::abs(got.precision[n] - want.p[n]) <= 1e-12, "p_n case " + std::to_string(i));
        }
        ++cases;
    }
    // corpus-level pooling
    for (int i = 0; i < 20; ++i) {
        std::vector<BleuPair> pairs;
        std::vector<std::pair<oracle::Tokens, oracle::Tokens>> ref_pairs;
        for (int j = 0; j < 10; ++j) {
            auto x = fixtures::random_words(g, 1, 10, 4), y = fixtures::random_words(g, 1, 10, 4);
            pairs.push_back({x, y});
            ref_pairs.emplace_back(x, y);
        }
        const auto got = corpus_bleu(pairs, 4);
        const auto want = oracle::bleu(ref_pairs, 4);
        for (int n = 0; n < 4; ++n)
            c.expect(std::abs(got.bleu[n] - want.b[n]) <= 1e-12, "corpus BLEU case " + std::to_string(i));
    }
    const double secs = seconds_since(start);
    c.expect(cases >= 200, "fewer than 200 cases");
    c.expect(secs < 5.0, "runtime " + fmt(secs) + " s");
    c.note(std::to_string(cases) + " cases, " + std::to_string(secs).substr(0, 5) + " s");
    return c;
}

Check informativeness_criterion() {
    Check c("informativeness: t=1 is 1, duplicate answer is 0, monotone over 500 random conversations");
    const auto dup = fixtures::conv("dup", "Alpha beta. Gamma delta.", {{"q1", "Alpha beta."}, {"q2", "Alpha beta."}});
    c.expect(informativeness(dup, 1) == 1.0, "t=1");
    c.expect(informativeness(dup, 2) == 0.0, "duplicate answer");
    std::mt19937_64 g(88);
    for (int i = 0; i < 500; ++i) {
        const auto conv = fixtures::random_conversation(g, "c", 2 + i % 6);
        c.expect(informativeness(conv, 1) == 1.0, "t=1 on random conversation " + std::to_string(i));
        const auto& last = conv.turns.back();
        double before = 1.0;
        for (std::size_t k = 0; k < conv.turns.size(); ++k) {
            Conversation prefix = conv;
            prefix.turns.assign(conv.turns.begin(), conv.turns.begin() + static_cast<long>(k));
            QAPair moved = last;
            moved.turn_index = k + 1;
            prefix.turns.push_back(moved);
            const double v = informativeness(prefix, k + 1);
            c.expect(v >= 0.0 && v <= before + 1e-15,
                     "increase on conversation " + std::to_string(i) + " at k=" + std::to_string(k));
            before = v;
        }
    }
    return c;
}

Check statistics_criterion() {
    Check c("statistics: hand fixture matches brute force");
    const auto ds = fixtures::stats_fixture();
    const auto got = dataset_statistics(ds);
    const auto want = oracle::stats(ds);
    c.expect(got.tokens_per_question == want.tpq, "tokens/question " + fmt(got.tokens_per_question));
    c.expect(got.tokens_per_answer == want.tpa, "tokens/answer " + fmt(got.tokens_per_answer));
    c.expect(std::abs(got.f1_q_a - want.f1_qa) <= 1e-12, "F1(q,a) " + fmt(got.f1_q_a));
    c.expect(std::abs(got.f1_q_prev_answers - want.f1_prev) <= 1e-12, "F1(q,prev) " + fmt(got.f1_q_prev_answers));
    c.expect(got.pct_anything_else == want.pct_else, "% anything else");
    c.expect(got.pct_unanswerable == want.pct_unans, "% unanswerable");
    c.expect(got.n_questions == want.nq, "question count");
    c.expect(got.tokens_per_question == 4.8 && got.pct_unanswerable == 20.0, "hand counts");

    std::string train;
    if (const char* env = std::getenv("SIMSEEK_QUAC_TRAIN")) train = env;
    else train = std::string(SIMSEEK_TEST_DATA) + "/quac_train.json";
    if (std::filesystem::exists(train)) {
        const auto s = dataset_statistics(import_quac_file(train).dataset);
        c.expect(std::abs(s.tokens_per_question - 6.5) <= 0.65, "QuAC train tokens/question " + fmt(s.tokens_per_question));
        c.expect(std::abs(s.pct_unanswerable - 17.3) <= 2.0, "QuAC train % unanswerable " + fmt(s.pct_unanswerable));
        c.note("QuAC train check ran");
    } else {
        c.note("QuAC train check skipped: " + train + " absent");
    }
    return c;
}

Check orchestration_criterion() {
    Check c("orchestration: 6 turns, wiki stop at 4, sym answerable, deterministic, 100 docs < 10 s");
    const auto docs = documents(100);
    SimulationAgents sym;
    sym.extractor = make_scripted_agent("span-extractor");
    sym.questioner = make_scripted_agent("template-questioner");
    SimulationAgents asym;
    asym.questioner = make_scripted_agent("template-questioner");
    asym.answerer = make_scripted_agent("lexical-answerer");

    const auto start = Clock::now();
    auto cfg = semi_supervised_config(SimulationMode::sym);
    cfg.seed = 5;
    const auto a = run_batch(docs, cfg, sym, 4);
    auto acfg = semi_supervised_config(SimulationMode::asym);
    acfg.seed = 5;
    const auto b = run_batch(docs, acfg, asym, 4);
    const double secs = seconds_since(start);

    c.expect(a.conversations.conversations.size() == 100, "sym produced " +
                                                              std::to_string(a.conversations.conversations.size()));
    for (const auto& conv : a.conversations.conversations) {
        c.expect(conv.turns.size() == 6, conv.conv_id + " sym has " + std::to_string(conv.turns.size()) + " turns");
        for (const auto& p : conv.turns) c.expect(!is_unanswerable(p.answer), conv.conv_id + " has an unanswerable");
    }
    for (const auto& conv : b.conversations.conversations)
        c.expect(conv.turns.size() == 6, conv.conv_id + " asym has " + std::to_string(conv.turns.size()) + " turns");
    c.expect(secs < 10.0, "runtime " + fmt(secs) + " s");

    SimulationAgents wiki;
    wiki.questioner = make_scripted_agent("template-questioner");
    wiki.answerer = make_scripted_agent("null-answerer");
    const auto w = run_batch(documents(10), wiki_config(), wiki, 2);
    for (const auto& conv : w.conversations.conversations)
        c.expect(conv.turns.size() == 4, "wiki stopped at " + std::to_string(conv.turns.size()));

    auto rcfg = cfg;
    rcfg.candidate_policy = CandidatePolicy::uniform_random;
    const auto r1 = canonical(run_batch(docs, rcfg, sym, 1).conversations);
    const auto r2 = canonical(run_batch(docs, rcfg, sym, 8).conversations);
    c.expect(r1 == r2, "same seed produced different bytes");
    c.expect(canonical(a.conversations) == canonical(run_batch(docs, cfg, sym, 2).conversations),
             "top1 rerun differs");
    c.note(std::to_string(secs).substr(0, 5) + " s for 2 x 100 documents");
    return c;
}

Check filter_criterion() {
    Check c("roundtrip filter: partition and success rate match hand counts, report columns");
    const std::string p = "Red apples grow here. Blue rivers run there. Green hills rise. Yellow sun shines.";
    const auto c1 = fixtures::conv("c1", p,
                                   {{"q1", "Red apples grow here."},
                                    {"q2", "Blue rivers run there."},
                                    {"q3", "Green hills rise."},
                                    {"q4", "Yellow sun shines."}});
    const auto c2 = fixtures::conv("c2", p,
                                   {{"q5", "Green hills rise."}, {"q6", "Red apples grow here."}, {"q7", "Green hills rise."}});
    const auto ds = fixtures::dataset({c1, c2}, "sym", Provenance::synthetic_sym);
    // F1: q1 = 1, q2 = 2/3, q3 = 0, q4 error, q5 = 2/7, q6 = 1, q7 = 1/2 exactly (kept)
    const std::map<std::string, std::string> answers{{"q1", "Red apples grow here."},
                                                     {"q2", "Blue rivers"},
                                                     {"q3", "Yellow sun shines."},
                                                     {"q5", "Green fields far away"},
                                                     {"q6", "red apples grow here"},
                                                     {"q7", "Green fields, hills and rivers"}};
    FnAgent filter([&](const PromptBundle& b) -> AgentResponse {
        const auto q = b.text.substr(b.text.rfind(' ') + 1);
        if (q == "q4") throw TransportError("unavailable");
        return text_reply(answers.at(q));
    });
    const auto r = roundtrip_filter(ds, filter, FilterConfig{});
    c.expect(r.total_pairs == 7, "total " + std::to_string(r.total_pairs));
    c.expect(r.kept_pairs == 4, "kept " + std::to_string(r.kept_pairs));
    c.expect(r.success_rate == 4.0 / 7.0, "success rate " + fmt(r.success_rate));
    std::vector<std::string> kept;
    for (const auto& conv : r.kept.conversations)
        for (const auto& t : conv.turns) kept.push_back(conv.conv_id + ":" + t.question + "@" + std::to_string(t.turn_index));
    c.expect(kept == std::vector<std::string>{"c1:q1@1", "c1:q2@2", "c2:q6@1", "c2:q7@2"}, "kept set");
    std::vector<std::string> dropped;
    for (const auto& d : r.dropped)
        dropped.push_back(d.conv_id + "#" + std::to_string(d.turn_index) +
                          (d.reason == DropReason::agent_error ? "E" : "B"));
    c.expect(dropped == std::vector<std::string>{"c1#3B", "c1#4E", "c2#1B"}, "dropped set");

    const auto report = format_filter_report({{"SimSeek-sym", r}});
    c.expect(report.find("#(D̂)") != std::string::npos, "missing #(D̂) column");
    c.expect(report.find("%(Success)") != std::string::npos, "missing %(Success) column");
    c.expect(report.find("57.1") != std::string::npos, "missing success percentage");
    return c;
}

Check evaluation_criterion() {
    Check c("evaluation: CQA 75.0/75/50, MRR 0.375, recall@5/@20 closed form");
    const std::vector<GoldQuestion> gold{{"d1_q#0", "d1", {"red green"}},
                                         {"d1_q#1", "d1", {"red green", "blue sky"}},
                                         {"d2_q#0", "d2", {"CANNOTANSWER"}},
                                         {"d2_q#1", "d2", {"CANNOTANSWER", "tall tree"}}};
    const std::map<std::string, std::string> preds{
        {"d1_q#0", "Red, green."}, {"d1_q#1", "blue cloud"}, {"d2_q#0", "CANNOTANSWER"}, {"d2_q#1", "tall bush"}};
    const auto f = cqa_f1(preds, gold);
    c.expect(std::abs(f.f1 - 75.0) < 1e-9, "F1 " + fmt(f.f1));
    std::map<std::string, std::string> dialogue;
    for (const auto& q : gold) dialogue[q.question_id] = q.dialogue_id;
    const auto h = heq(f.per_question, {{"d1_q#0", 0.8}, {"d1_q#1", 0.4}, {"d2_q#0", 0.9}, {"d2_q#1", 0.6}}, dialogue);
    c.expect(std::abs(h.heq_q - 75.0) < 1e-9, "HEQ-Q " + fmt(h.heq_q));
    c.expect(std::abs(h.heq_d - 50.0) < 1e-9, "HEQ-D " + fmt(h.heq_d));

    const std::vector<RankedRetrieval> two{{"q1", {"x", "g1", "y"}, "g1"}, {"q2", {"a", "b", "c", "g2"}, "g2"}};
    c.expect(std::abs(mrr(two) - 0.375) < 1e-12, "MRR " + fmt(mrr(two)));

    std::mt19937_64 g(12);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<RankedRetrieval> rs;
        std::size_t at5 = 0, at20 = 0;
        double rr = 0;
        for (int q = 0; q < 40; ++q) {
            const std::size_t rank = 1 + g() % 30;  // 30 means absent from a 29-long list
            RankedRetrieval r{"q" + std::to_string(q), {}, "gold"};
            for (std::size_t i = 1; i < 30; ++i) r.ranked.push_back(i == rank ? "gold" : "p" + std::to_string(i));
            at5 += rank <= 5;
            at20 += rank <= 20;
            rr += rank < 30 ? 1.0 / static_cast<double>(rank) : 0.0;
            rs.push_back(r);
        }
        c.expect(std::abs(recall_at_k(rs, 5) - at5 / 40.0) < 1e-12, "recall@5 trial " + std::to_string(trial));
        c.expect(std::abs(recall_at_k(rs, 20) - at20 / 40.0) < 1e-12, "recall@20 trial " + std::to_string(trial));
        c.expect(std::abs(mrr(rs) - rr / 40.0) < 1e-12, "MRR trial " + std::to_string(trial));
    }
    return c;
}

double bootstrap_vec(const std::vector<bool>& v, std::size_t samples, std::uint64_t seed) {
    auto flags = std::make_unique<bool[]>(v.size());
    std::copy(v.begin(), v.end(), flags.get());
    return bootstrap_test({flags.get(), v.size()}, samples, seed);
}

Check bootstrap_criterion() {
    Check c("bootstrap: unanimous p=0, deterministic, fair-coin rejection in [0.05, 0.15], 1e5 x 300 < 5 s");
    c.expect(bootstrap_vec(std::vector<bool>(30, true), 10000, 1) == 0.0, "unanimous x");
    c.expect(bootstrap_vec(std::vector<bool>(30, false), 10000, 1) == 0.0, "unanimous y");

    std::mt19937_64 g(77);
    std::vector<bool> mixed(100);
    for (auto&& b : mixed) b = g() % 2;
    c.expect(bootstrap_vec(mixed, 20000, 42) == bootstrap_vec(mixed, 20000, 42), "same seed, different p");
    c.expect(bootstrap_vec(mixed, 20000, 42) == oracle::bootstrap(mixed, 20000, 42), "differs from reference");

    std::bernoulli_distribution coin(0.5);
    int rejections = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        std::vector<bool> outcomes(100);
        for (auto&& b : outcomes) b = coin(g);
        rejections += bootstrap_vec(outcomes, 2000, 1000 + static_cast<std::uint64_t>(t)) < 0.1;
    }
    const double rate = static_cast<double>(rejections) / trials;
    c.expect(rate >= 0.05 && rate <= 0.15, "fair-coin rejection rate " + fmt(rate));
    c.note("rejection rate " + fmt(rate));

    std::vector<bool> big(300);
    for (auto&& b : big) b = coin(g);
    const auto start = Clock::now();
    bootstrap_vec(big, 100000, 3);
    const double secs = seconds_since(start);
    c.expect(secs < 5.0, "1e5 resamples took " + fmt(secs) + " s");
    c.note("1e5 x 300 in " + std::to_string(secs).substr(0, 5) + " s");
    return c;
}

AgentEndpoint remote_endpoint(const std::string& address, int retries, int timeout_ms) {
    AgentEndpoint ep;
    ep.kind = RemoteKind{address};
    ep.retries = retries;
    ep.timeout = std::chrono::milliseconds(timeout_ms);
    ep.backoff = std::chrono::milliseconds(5);
    return ep;
}

template <class E, class F>
bool throws(F&& f) {
    try {
        f();
    } catch (const E&) {
        return true;
    } catch (...) {
        return false;
    }
    return false;
}

Check wire_criterion() {
    Check c("wire protocol: mock server round-trip for all four roles, CAE lists, timeout, retries, malformed reply");
    MockAgentServer server;
    RemoteAgent agent(remote_endpoint(server.address(), 0, 2000));
    const auto hist = fixtures::conv("h", kPassage, {{"Where was he born?", "born in Kansas"}}).turns;
    const BackgroundInfo bg{"Buster Keaton", "Career", "An American actor."};

    const std::vector<PromptBundle> bundles{
        build_cae_input(kPassage, &hist[0]),
        build_cqg_answer_prompt(kPassage, hist, AnswerSpan::at("He later moved to film", kPassage.find("He later"))),
        build_cqg_prior_prompt(bg, hist),
        build_caf_input("What did he direct?", kPassage, hist, bg)};
    const std::vector<AgentPtr> local{make_scripted_agent("span-extractor"), make_scripted_agent("template-questioner"),
                                      make_scripted_agent("template-questioner"),
                                      make_scripted_agent("lexical-answerer")};
    for (std::size_t i = 0; i < bundles.size(); ++i) {
        const auto role = std::string(to_string(bundles[i].role));
        try {
            const auto got = agent.invoke(bundles[i]);
            c.expect(got == local[i]->invoke(bundles[i]), role + " reply differs from the scripted agent");
        } catch (const std::exception& e) {
            c.expect(false, role + ": " + e.what());
        }
    }
    const auto bodies = server.request_bodies();
    c.expect(bodies.size() == 4, "request count " + std::to_string(bodies.size()));
    std::set<std::string> ids;
    for (std::size_t i = 0; i < bodies.size() && i < bundles.size(); ++i) {
        const auto j = json::parse(bodies[i], nullptr, false);
        c.expect(j.is_object() && j.value("role", "") == to_string(bundles[i].role), "role field");
        c.expect(j.is_object() && j.value("prompt", "") == bundles[i].text, "prompt field");
        c.expect(j.is_object() && j.contains("generation") && j["generation"].contains("beam_size") &&
                     j["generation"].contains("top_p") && j["generation"].contains("temperature") &&
                     j["generation"].contains("max_new_tokens"),
                 "generation fields");
        if (j.is_object()) ids.insert(j.value("request_id", ""));
    }
    c.expect(ids.size() == 4 && !ids.count(""), "request ids not unique");

    // CAE candidate list carries offsets that point into the passage
    const auto cae = agent.invoke(bundles[0]);
    c.expect(cae.outputs.size() > 1 && cae.k.has_value(), "CAE reply is not a ranked list");
    for (const auto& o : cae.outputs)
        c.expect(o.start.has_value() && kPassage.compare(*o.start, o.text.size(), o.text) == 0,
                 "CAE candidate offset mismatch for '" + o.text + "'");
    c.expect(to_candidate_set(cae, kPassage, 10).size() == cae.outputs.size(), "candidate set size");

    MockAgentBehavior slow;
    slow.delay = std::chrono::milliseconds(400);
    MockAgentServer slow_server(slow);
    RemoteAgent impatient(remote_endpoint(slow_server.address(), 0, 100));
    c.expect(throws<TransportError>([&] { impatient.invoke(bundles[0]); }), "timeout is not a TransportError");

    MockAgentBehavior flaky;
    flaky.fail_first_n = 2;
    MockAgentServer flaky_server(flaky);
    RemoteAgent retrying(remote_endpoint(flaky_server.address(), 2, 2000));
    c.expect(!throws<std::exception>([&] { retrying.invoke(bundles[3]); }), "5xx not retried to success");
    c.expect(flaky_server.request_count() == 3, "retry count " + std::to_string(flaky_server.request_count()));

    for (auto kind : {MockAgentBehavior::Reply::malformed_json, MockAgentBehavior::Reply::missing_outputs,
                      MockAgentBehavior::Reply::wrong_request_id}) {
        MockAgentBehavior bad;
        bad.reply = kind;
        MockAgentServer bad_server(bad);
        RemoteAgent victim(remote_endpoint(bad_server.address(), 2, 2000));
        c.expect(throws<ProtocolError>([&] { victim.invoke(bundles[2]); }), "malformed reply not a ProtocolError");
        c.expect(bad_server.request_count() == 1, "protocol error was retried");
    }
    return c;
}

Dataset hundred_questions(std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::vector<Conversation> convs;
    int made = 0;
    for (int c = 0; made < 100; ++c) {
        const std::size_t turns = std::min<std::size_t>(1 + c % 7, static_cast<std::size_t>(100 - made));
        auto conv = fixtures::random_conversation(g, "conv" + std::to_string(c), turns);
        for (auto& p : conv.turns)
            if (g() % 4 == 0) p.question = (g() % 2) ? "Anything else?" : "What happened next?";
        made += static_cast<int>(turns);
        convs.push_back(std::move(conv));
    }
    return fixtures::dataset(convs);
}

Check classifier_criterion() {
    Check c("classifier data: reproducible, negatives match the reference sampler on 100 questions");
    const auto ds = hundred_questions(5);
    for (std::uint64_t seed : {1u, 7u, 123u}) {
        const auto spec = build_specificity_training_set(ds, seed);
        std::size_t fb = 0;
        const auto want_spec = oracle::specificity(ds, seed, &fb);
        c.expect(spec.examples.size() == want_spec.size(), "specificity size");
        for (std::size_t i = 0; i < std::min(spec.examples.size(), want_spec.size()); ++i)
            c.expect(oracle::same(spec.examples[i], want_spec[i]),
                     "specificity example " + std::to_string(i) + " seed " + std::to_string(seed));
        c.expect(spec.fallbacks == fb, "specificity fallbacks");

        const auto rel = build_relevance_training_set(ds, seed);
        const auto want_rel = oracle::relevance(ds, seed, &fb);
        c.expect(rel.examples.size() == want_rel.size(), "relevance size");
        for (std::size_t i = 0; i < std::min(rel.examples.size(), want_rel.size()); ++i)
            c.expect(oracle::same(rel.examples[i], want_rel[i]),
                     "relevance example " + std::to_string(i) + " seed " + std::to_string(seed));
        c.expect(rel.fallbacks == fb, "relevance fallbacks");

        std::ostringstream a, b;
        write_classifier_data(a, spec);
        write_classifier_data(b, build_specificity_training_set(ds, seed));
        c.expect(a.str() == b.str(), "specificity output not reproducible");
        std::ostringstream x, y;
        write_classifier_data(x, rel);
        write_classifier_data(y, build_relevance_training_set(ds, seed));
        c.expect(x.str() == y.str(), "relevance output not reproducible");
    }
    return c;
}

}  // namespace

int main() {
    const std::vector<std::function<Check()>> criteria{
        metric_oracles,      informativeness_criterion, statistics_criterion, orchestration_criterion,
        filter_criterion,    evaluation_criterion,      bootstrap_criterion,  wire_criterion,
        classifier_criterion};
    int failed = 0;
    for (const auto& run : criteria) {
        Check result("");
        try {
            result = run();
        } catch (const std::exception& e) {
            result = Check("criterion threw");
            result.expect(false, e.what());
        }
        result.print(std::cout);
        failed += !result.ok();
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
