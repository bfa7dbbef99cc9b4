#include "simseek/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "simseek/agents.hpp"
#include "simseek/analysis.hpp"
#include "simseek/corpus.hpp"
#include "simseek/evalsuite.hpp"
#include "simseek/humaneval.hpp"
#include "simseek/simulator.hpp"

namespace simseek {

namespace {

namespace fs = std::filesystem;

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    return in;
}

std::pair<std::string, std::string> split_assignment(const std::string& s, const char* flag) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
        throw CLI::ValidationError(flag, "expected name=path, got '" + s + "'");
    return {s.substr(0, eq), s.substr(eq + 1)};
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

AgentsConfig default_agents() {
    return parse_agents_config(R"({
        "extractor": {"scripted": "span-extractor"},
        "questioner": {"scripted": "template-questioner"},
        "answerer": {"scripted": "lexical-answerer"},
        "filter": {"scripted": "lexical-answerer"}
    })");
}

struct GenerationOverrides {
    std::optional<int> beam_size;
    std::optional<double> top_p;
    std::optional<double> temperature;
    std::optional<int> max_new_tokens;

    void add_to(CLI::App* app) {
        app->add_option("--beam-size", beam_size, "Override beam size for every agent");
        app->add_option("--top-p", top_p, "Override nucleus top-p for every agent");
        app->add_option("--temperature", temperature, "Override sampling temperature for every agent");
        app->add_option("--max-new-tokens", max_new_tokens, "Override generation length for every agent");
    }

    void apply(AgentsConfig& cfg) const {
        auto patch = [&](GenerationConfig& g) {
            if (beam_size) g.beam_size = *beam_size;
            if (top_p) g.top_p = *top_p;
            if (temperature) g.temperature = *temperature;
            if (max_new_tokens) g.max_new_tokens = *max_new_tokens;
            validate(g);
        };
        patch(cfg.generation);
        for (auto& [_, ep] : cfg.endpoints) patch(ep.generation);
    }
};

void print_metric(std::ostream& out, const std::string& name, double value, bool tsv) {
    if (tsv) {
        out << name << '\t' << std::fixed << std::setprecision(4) << value << '\n';
    } else {
        out << std::left << std::setw(12) << name << std::right << std::setw(10) << std::fixed << std::setprecision(2)
            << value << '\n';
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulated information-seeking conversations and their evaluation", "simseek"};
    app.require_subcommand(1);

    // import --------------------------------------------------------------
    std::string import_in, import_out, import_name = "quac";
    std::vector<std::string> import_splits;
    auto* cmd_import = app.add_subcommand("import", "Import QuAC JSON into the canonical conversation format");
    cmd_import->add_option("--in", import_in, "QuAC distribution file")->required();
    cmd_import->add_option("--out", import_out, "Canonical output (.jsonl)")->required();
    cmd_import->add_option("--name", import_name, "Dataset name");
    cmd_import->add_option("--split", import_splits,
                           "name=ids.txt; writes <out stem>.<name>.jsonl with the listed conv_ids");

    // simulate ------------------------------------------------------------
    std::string sim_mode = "sym", sim_agents, sim_in, sim_out, sim_manifest, sim_policy = "top1";
    std::size_t sim_turns = 6, sim_k = 10, sim_jobs = 1;
    std::optional<std::size_t> sim_budget, sim_min_words, sim_max_words;
    std::uint64_t sim_seed = 0;
    GenerationOverrides sim_gen;
    auto* cmd_sim = app.add_subcommand("simulate", "Simulate one conversation per document");
    cmd_sim->add_option("--mode", sim_mode, "sym or asym")->check(CLI::IsMember({"sym", "asym"}));
    cmd_sim->add_option("--max-turns", sim_turns, "Maximum turns T")->check(CLI::PositiveNumber);
    cmd_sim->add_option("--budget", sim_budget, "Stop once unanswerable questions exceed this count");
    cmd_sim->add_option("--k", sim_k, "Extractor candidates to request")->check(CLI::PositiveNumber);
    cmd_sim->add_option("--policy", sim_policy, "top1, top1-dedup or uniform-random")
        ->check(CLI::IsMember({"top1", "top1-dedup", "uniform-random"}));
    cmd_sim->add_option("--agents", sim_agents, "Agent endpoint config (JSON); scripted agents when omitted");
    cmd_sim->add_option("--in", sim_in, "Documents (.jsonl)")->required();
    cmd_sim->add_option("--out", sim_out, "Canonical conversations output")->required();
    cmd_sim->add_option("--manifest", sim_manifest, "Run manifest path (default <out>.manifest.json)");
    cmd_sim->add_option("--seed", sim_seed, "Random seed");
    cmd_sim->add_option("--jobs", sim_jobs, "Documents simulated in parallel")->check(CLI::PositiveNumber);
    cmd_sim->add_option("--min-words", sim_min_words, "Drop passages shorter than this");
    cmd_sim->add_option("--max-words", sim_max_words, "Drop passages longer than this");
    sim_gen.add_to(cmd_sim);

    // filter --------------------------------------------------------------
    std::string filt_in, filt_agents, filt_out, filt_dropped;
    double filt_threshold = 0.5;
    bool filt_keep_all = false;
    auto* cmd_filter = app.add_subcommand("filter", "Roundtrip-filter answer-grounded conversations");
    cmd_filter->add_option("--in", filt_in, "Canonical conversations")->required();
    cmd_filter->add_option("--agents", filt_agents, "Agent config; the 'filter' entry is used");
    cmd_filter->add_option("--threshold", filt_threshold, "Minimum F1 to keep a pair")->check(CLI::Range(0.0, 1.0));
    cmd_filter->add_flag("--keep-all", filt_keep_all, "Score pairs without dropping low-F1 ones");
    cmd_filter->add_option("--out", filt_out, "Kept conversations output")->required();
    cmd_filter->add_option("--dropped", filt_dropped, "TSV of dropped pairs");

    // stats ---------------------------------------------------------------
    std::vector<std::string> stats_in;
    bool stats_tsv = false;
    auto* cmd_stats = app.add_subcommand("stats", "Dataset statistics table");
    cmd_stats->add_option("--in", stats_in, "Canonical datasets (one column each)")->required();
    cmd_stats->add_flag("--tsv", stats_tsv, "Machine-readable rows");

    // curves --------------------------------------------------------------
    std::string curves_in, curves_out;
    std::vector<std::string> curves_scores;
    auto* cmd_curves = app.add_subcommand("curves", "Per-turn metric curves");
    cmd_curves->add_option("--in", curves_in, "Canonical conversations")->required();
    cmd_curves->add_option("--scores", curves_scores, "name=file of conv_id<TAB>t<TAB>score lines");
    cmd_curves->add_option("--out", curves_out, "Output TSV (stdout when omitted)");

    // eval-cqa ------------------------------------------------------------
    std::string cqa_pred, cqa_gold, cqa_human;
    bool cqa_tsv = false;
    auto* cmd_cqa = app.add_subcommand("eval-cqa", "CQA accuracy: F1, HEQ-Q, HEQ-D");
    cmd_cqa->add_option("--pred", cqa_pred, "Predictions: question_id<TAB>answer")->required();
    cmd_cqa->add_option("--gold", cqa_gold, "QuAC .json or canonical .jsonl")->required();
    cmd_cqa->add_option("--human-f1", cqa_human, "Per-question human F1: question_id<TAB>f1");
    cmd_cqa->add_flag("--tsv", cqa_tsv, "Machine-readable rows");

    // eval-retrieval ------------------------------------------------------
    std::string ret_in;
    std::vector<std::size_t> ret_k{5, 20};
    bool ret_tsv = false;
    auto* cmd_ret = app.add_subcommand("eval-retrieval", "Conversational retrieval: MRR and Recall@k");
    cmd_ret->add_option("--in", ret_in, "Rankings: query_id<TAB>id1,id2,...<TAB>gold")->required();
    cmd_ret->add_option("--k", ret_k, "Recall cut-offs")->delimiter(',');
    cmd_ret->add_flag("--tsv", ret_tsv, "Machine-readable rows");

    // eval-bleu -----------------------------------------------------------
    std::string bleu_gen, bleu_gold;
    bool bleu_tsv = false;
    auto* cmd_bleu = app.add_subcommand("eval-bleu", "Intrinsic question-generation BLEU-1..4");
    cmd_bleu->add_option("--generated", bleu_gen, "conv_id<TAB>t<TAB>question lines")->required();
    cmd_bleu->add_option("--gold", bleu_gold, "Canonical dataset with gold questions")->required();
    cmd_bleu->add_flag("--tsv", bleu_tsv, "Machine-readable rows");

    // build-classifier-data -----------------------------------------------
    std::string cls_in, cls_out, cls_kind = "specificity";
    std::uint64_t cls_seed = 0;
    auto* cmd_cls = app.add_subcommand("build-classifier-data", "Training data for specificity/relevance classifiers");
    cmd_cls->add_option("--in", cls_in, "Canonical conversations")->required();
    cmd_cls->add_option("--kind", cls_kind, "specificity or relevance")
        ->check(CLI::IsMember({"specificity", "relevance"}));
    cmd_cls->add_option("--seed", cls_seed, "Random seed");
    cmd_cls->add_option("--out", cls_out, "Output JSONL")->required();

    // humaneval-tasks -----------------------------------------------------
    std::string het_a, het_b, het_out;
    std::size_t het_n = 296;
    std::uint64_t het_seed = 0;
    auto* cmd_het = app.add_subcommand("humaneval-tasks", "Sample pairwise judgment tasks from two datasets");
    cmd_het->add_option("--a", het_a, "First canonical dataset (provides the shared history)")->required();
    cmd_het->add_option("--b", het_b, "Second canonical dataset")->required();
    cmd_het->add_option("--n", het_n, "Number of tasks");
    cmd_het->add_option("--seed", het_seed, "Random seed");
    cmd_het->add_option("--out", het_out, "Tasks JSONL")->required();

    // humaneval-serve / humaneval-report ----------------------------------
    std::string hes_tasks, hes_votes, hes_host = "127.0.0.1", hes_static;
    int hes_port = 8080;
    std::size_t he_panel = 5, he_samples = 100000;
    std::uint64_t he_seed = 0;
    bool he_json = false, he_keep_unanswerable = false, he_keep_anything_else = false;
    auto* cmd_serve = app.add_subcommand("humaneval-serve", "Run the pairwise annotation service");
    cmd_serve->add_option("--tasks", hes_tasks, "Tasks JSONL")->required();
    cmd_serve->add_option("--votes", hes_votes, "Append-only vote log")->required();
    cmd_serve->add_option("--port", hes_port, "Port (0 picks a free one)");
    cmd_serve->add_option("--host", hes_host, "Bind address");
    cmd_serve->add_option("--static", hes_static, "Directory of UI assets served at /");
    cmd_serve->add_option("--panel-size", he_panel, "Votes per task (odd)");
    cmd_serve->add_option("--seed", he_seed, "Bootstrap seed for /api/report");
    cmd_serve->add_option("--samples", he_samples, "Bootstrap resamples");

    std::string her_tasks, her_votes;
    auto* cmd_report = app.add_subcommand("humaneval-report", "Aggregate votes into majority proportions");
    cmd_report->add_option("--tasks", her_tasks, "Tasks JSONL")->required();
    cmd_report->add_option("--votes", her_votes, "Vote log")->required();
    cmd_report->add_option("--seed", he_seed, "Bootstrap seed");
    cmd_report->add_option("--samples", he_samples, "Bootstrap resamples")->check(CLI::PositiveNumber);
    cmd_report->add_option("--panel-size", he_panel, "Votes per task (odd)");
    cmd_report->add_flag("--json", he_json, "Print the JSON report");
    cmd_report->add_flag("--keep-unanswerable", he_keep_unanswerable, "Do not exclude unanswerable candidates");
    cmd_report->add_flag("--keep-anything-else", he_keep_anything_else, "Do not exclude \"Anything else?\" questions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (cmd_import->parsed()) {
            auto result = import_quac_file(import_in, import_name);
            for (const auto& w : result.warnings) err << "warning: " << w << '\n';
            write_canonical_file(import_out, result.dataset);
            std::size_t questions = 0;
            for (const auto& c : result.dataset.conversations) questions += c.turns.size();
            out << "imported " << result.dataset.conversations.size() << " conversations, " << questions
                << " questions\n";
            if (!import_splits.empty()) {
                std::vector<SplitSpec> specs;
                std::vector<std::string> paths;
                for (const auto& s : import_splits) {
                    auto [name, ids_path] = split_assignment(s, "--split");
                    SplitSpec spec{name, {}};
                    auto in = open_in(ids_path);
                    for (std::string line; std::getline(in, line);) {
                        if (!line.empty() && line.back() == '\r') line.pop_back();
                        if (!line.empty()) spec.conv_ids.insert(line);
                    }
                    specs.push_back(std::move(spec));
                    fs::path p(import_out);
                    paths.push_back((p.parent_path() / (p.stem().string() + "." + name + ".jsonl")).string());
                }
                const auto parts = split_dataset(result.dataset, specs);
                for (std::size_t i = 0; i < parts.size(); ++i) {
                    write_canonical_file(paths[i], parts[i]);
                    std::size_t q = 0;
                    for (const auto& c : parts[i].conversations) q += c.turns.size();
                    out << parts[i].name << ": " << parts[i].conversations.size() << " passages, " << q
                        << " questions -> " << paths[i] << '\n';
                }
            }
            return 0;
        }

        if (cmd_sim->parsed()) {
            SimulationConfig config;
            config.mode = mode_from_string(sim_mode);
            config.max_turns = sim_turns;
            config.unanswerable_budget = sim_budget;
            config.k = sim_k;
            config.candidate_policy = policy_from_string(sim_policy);
            config.seed = sim_seed;

            AgentsConfig agents_cfg = sim_agents.empty() ? default_agents() : load_agents_config(sim_agents);
            sim_gen.apply(agents_cfg);
            SimulationAgents agents;
            if (config.mode == SimulationMode::sym) {
                agents.extractor = make_agent(agents_cfg.at("extractor"));
                agents.questioner = make_agent(agents_cfg.at("questioner"));
            } else {
                agents.questioner = make_agent(agents_cfg.at("questioner"));
                agents.answerer = make_agent(agents_cfg.at("answerer"));
            }

            auto docs = read_documents_file(sim_in);
            if (sim_min_words || sim_max_words)
                docs = filter_passages_by_length(docs, sim_min_words.value_or(0),
                                                 sim_max_words.value_or(std::numeric_limits<std::size_t>::max()));
            const auto report = run_batch(docs, config, agents, sim_jobs);
            write_canonical_file(sim_out, report.conversations);
            const std::string manifest_path = sim_manifest.empty() ? sim_out + ".manifest.json" : sim_manifest;
            auto mf = open_out(manifest_path);
            mf << run_manifest(config, agents, report, agents_cfg.generation, utc_now()) << '\n';
            for (const auto& f : report.failures) err << "aborted " << f.doc_id << ": " << f.error << '\n';
            out << "attempted " << report.attempted << ", conversations " << report.conversations.conversations.size()
                << ", aborted " << report.aborted << '\n';
            return 0;
        }

        if (cmd_filter->parsed()) {
            const auto dataset = read_canonical_file(filt_in, Provenance::synthetic_sym);
            AgentsConfig agents_cfg = filt_agents.empty() ? default_agents() : load_agents_config(filt_agents);
            const auto filter_agent = make_agent(agents_cfg.at("filter"));
            const auto result = roundtrip_filter(dataset, *filter_agent, FilterConfig{filt_threshold, !filt_keep_all});
            write_canonical_file(filt_out, result.kept);
            if (!filt_dropped.empty()) {
                auto d = open_out(filt_dropped);
                d << "conv_id\tt\treason\tf1\n";
                for (const auto& p : result.dropped)
                    d << p.conv_id << '\t' << p.turn_index << '\t'
                      << (p.reason == DropReason::agent_error ? "agent_error" : "below_threshold") << '\t'
                      << std::fixed << std::setprecision(4) << p.f1 << '\n';
            }
            out << format_filter_report({{fs::path(filt_in).stem().string(), result}});
            return 0;
        }

        if (cmd_stats->parsed()) {
            std::vector<std::pair<std::string, StatReport>> columns;
            for (const auto& path : stats_in)
                columns.emplace_back(fs::path(path).stem().string(), dataset_statistics(read_canonical_file(path)));
            if (stats_tsv) {
                out << "dataset\ttokens_per_question\ttokens_per_answer\tf1_q_a\tf1_q_prev_answers\t"
                       "pct_anything_else\tpct_unanswerable\tn_questions\tn_conversations\n";
                for (const auto& [name, r] : columns)
                    out << name << '\t' << std::fixed << std::setprecision(4) << r.tokens_per_question << '\t'
                        << r.tokens_per_answer << '\t' << r.f1_q_a << '\t' << r.f1_q_prev_answers << '\t'
                        << r.pct_anything_else << '\t' << r.pct_unanswerable << '\t' << r.n_questions << '\t'
                        << r.n_conversations << '\n';
            } else {
                out << format_stat_table(columns);
            }
            return 0;
        }

        if (cmd_curves->parsed()) {
            const auto dataset = read_canonical_file(curves_in);
            std::vector<ExternalScores> external;
            external.reserve(curves_scores.size());
            std::vector<NamedScorer> scorers{informativeness_scorer()};
            for (const auto& s : curves_scores) {
                auto [name, path] = split_assignment(s, "--scores");
                external.push_back(ExternalScores::load(path));
                scorers.push_back(external.back().scorer(name));
            }
            const auto curves = per_turn_curves(dataset, scorers);
            if (curves_out.empty()) {
                out << format_curves(curves);
            } else {
                auto f = open_out(curves_out);
                f << format_curves(curves);
            }
            for (const auto& c : curves)
                if (c.skipped) err << "warning: " << c.metric << " skipped " << c.skipped << " pairs\n";
            return 0;
        }

        if (cmd_cqa->parsed()) {
            auto pred_in = open_in(cqa_pred);
            const auto predictions = read_predictions(pred_in);
            const auto gold = fs::path(cqa_gold).extension() == ".json"
                                  ? gold_from_quac(read_file(cqa_gold))
                                  : gold_from_dataset(read_canonical_file(cqa_gold));
            const auto score = cqa_f1(predictions, gold);
            print_metric(out, "F1", score.f1, cqa_tsv);
            if (!cqa_human.empty()) {
                auto hin = open_in(cqa_human);
                const auto human = read_scores(hin);
                std::map<std::string, std::string> dialogue_of;
                for (const auto& g : gold) dialogue_of[g.question_id] = g.dialogue_id;
                const auto h = heq(score.per_question, human, dialogue_of);
                print_metric(out, "HEQ-Q", h.heq_q, cqa_tsv);
                print_metric(out, "HEQ-D", h.heq_d, cqa_tsv);
            }
            if (!score.missing.empty()) err << "warning: " << score.missing.size() << " questions had no prediction\n";
            return 0;
        }

        if (cmd_ret->parsed()) {
            auto in = open_in(ret_in);
            const auto rankings = read_rankings(in);
            print_metric(out, "MRR", mrr(rankings), ret_tsv);
            for (auto k : ret_k) print_metric(out, "R@" + std::to_string(k), recall_at_k(rankings, k), ret_tsv);
            return 0;
        }

        if (cmd_bleu->parsed()) {
            auto in = open_in(bleu_gen);
            const auto generated = read_turn_questions(in);
            const auto gold = questions_of(read_canonical_file(bleu_gold));
            const auto scores = intrinsic_bleu_eval(generated, gold);
            for (int n = 0; n < 4; ++n)
                print_metric(out, "B-" + std::to_string(n + 1), 100.0 * scores.bleu[n], bleu_tsv);
            return 0;
        }

        if (cmd_cls->parsed()) {
            const auto dataset = read_canonical_file(cls_in);
            const auto data = cls_kind == "specificity" ? build_specificity_training_set(dataset, cls_seed)
                                                        : build_relevance_training_set(dataset, cls_seed);
            for (const auto& w : data.warnings) err << "warning: " << w << '\n';
            auto f = open_out(cls_out);
            write_classifier_data(f, data);
            std::size_t negatives = 0;
            for (const auto& ex : data.examples) negatives += ex.label == ExampleLabel::negative;
            out << data.examples.size() << " examples, " << negatives << " negatives\n";
            return 0;
        }

        if (cmd_het->parsed()) {
            auto a = read_canonical_file(het_a);
            auto b = read_canonical_file(het_b);
            a.name = fs::path(het_a).stem().string();
            b.name = fs::path(het_b).stem().string();
            const auto tasks = create_tasks(a, b, het_n, het_seed);
            auto f = open_out(het_out);
            write_tasks(f, tasks);
            out << tasks.size() << " tasks\n";
            return 0;
        }

        ReportOptions options;
        options.seed = he_seed;
        options.n_samples = he_samples;
        options.panel_size = he_panel;
        if (he_panel == 0 || he_panel % 2 == 0) throw std::invalid_argument("--panel-size must be odd");

        if (cmd_serve->parsed()) {
            VoteLog log(hes_votes);
            HumanEvalService service(read_tasks_file(hes_tasks), log, options, hes_static);
            const int port = service.bind(hes_host, hes_port);
            if (port <= 0) throw std::runtime_error("cannot bind " + hes_host + ":" + std::to_string(hes_port));
            g_interrupted = false;
            auto prev_int = std::signal(SIGINT, on_signal);
            auto prev_term = std::signal(SIGTERM, on_signal);
            out << "serving on http://" << hes_host << ":" << port << std::endl;
            std::jthread watcher([&service](std::stop_token st) {
                while (!st.stop_requested() && !g_interrupted)
                    std::this_thread::sleep_for(std::chrono::milliseconds(100));
                service.stop();
            });
            service.listen();
            watcher.request_stop();
            watcher.join();
            std::signal(SIGINT, prev_int);
            std::signal(SIGTERM, prev_term);
            return 0;
        }

        if (cmd_report->parsed()) {
            options.rules.exclude_unanswerable = !he_keep_unanswerable;
            options.rules.exclude_anything_else = !he_keep_anything_else;
            const auto tasks = read_tasks_file(her_tasks);
            VoteLog log(her_votes);
            const auto rep = report(tasks, log.snapshot(), options);
            out << (he_json ? report_to_json(rep) + "\n" : format_report(rep));
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace simseek
