#include <chrono>
#include <ctime>
#include <thread>
#include <unordered_map>

#include "httplib.h"
#include "json.hpp"
#include "simseek/humaneval.hpp"

namespace simseek {

using nlohmann::json;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

}  // namespace

struct HumanEvalService::Impl {
    std::vector<JudgmentTask> tasks;
    std::unordered_map<std::string, std::size_t> index;
    VoteLog& log;
    ReportOptions options;
    std::string static_dir;

    httplib::Server server;
    std::thread thread;
    std::mutex session_mu;
    std::size_t next_session = 0;

    Impl(std::vector<JudgmentTask> t, VoteLog& l, ReportOptions o, std::string dir)
        : tasks(std::move(t)), log(l), options(std::move(o)), static_dir(std::move(dir)) {}

    void handle_vote(const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) return send_json(res, 400, {{"error", "body must be a JSON object"}});
        if (!body.contains("task_id") || !body["task_id"].is_string() || !body.contains("annotator_id") ||
            !body["annotator_id"].is_string() || body["annotator_id"].get<std::string>().empty())
            return send_json(res, 400, {{"error", "task_id and annotator_id are required"}});

        Vote vote;
        vote.task_id = body["task_id"].get<std::string>();
        vote.annotator_id = body["annotator_id"].get<std::string>();
        if (!index.contains(vote.task_id)) return send_json(res, 404, {{"error", "unknown task " + vote.task_id}});

        const auto choices = body.value("choices", json::object());
        if (!choices.is_object()) return send_json(res, 400, {{"error", "choices must be an object"}});
        for (auto c : kCriteria) {
            const auto key = std::string(to_string(c));
            if (!choices.contains(key) || !choices[key].is_string())
                return send_json(res, 400, {{"error", "missing choice for criterion " + key}});
            const auto side = choices[key].get<std::string>();
            if (side != "A" && side != "B")
                return send_json(res, 400, {{"error", "choice for " + key + " must be \"A\" or \"B\""}});
            vote.choices[c] = side == "A" ? Side::a : Side::b;
        }
        if (choices.size() != kCriteria.size()) return send_json(res, 400, {{"error", "unknown criterion in choices"}});

        if (log.has_voted(vote.task_id, vote.annotator_id))
            return send_json(res, 200, {{"status", "already_recorded"}});
        if (log.votes_for(vote.task_id) >= options.panel_size)
            return send_json(res, 409, {{"error", "task already has a full panel"}});

        vote.timestamp = utc_now();
        const auto status = log.submit(vote, options.panel_size);
        if (status == SubmitStatus::duplicate) return send_json(res, 200, {{"status", "already_recorded"}});
        if (status == SubmitStatus::panel_full) return send_json(res, 409, {{"error", "task already has a full panel"}});
        send_json(res, 201, {{"status", "recorded"}});
    }

    void routes(HumanEvalService& self) {
        server.Get("/api/session/new", [&self](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"annotator_id", self.new_session()}});
        });
        server.Get("/api/tasks/next", [&self](const httplib::Request& req, httplib::Response& res) {
            const auto annotator = req.get_param_value("annotator");
            if (annotator.empty()) return send_json(res, 400, {{"error", "annotator parameter is required"}});
            const auto task = self.next_task(annotator);
            if (!task) return send_json(res, 200, {{"done", true}});
            res.status = 200;
            res.set_content(task_to_json(*task, false), "application/json");
        });
        server.Post("/api/votes",
                    [this](const httplib::Request& req, httplib::Response& res) { handle_vote(req, res); });
        server.Get("/api/report", [&self](const httplib::Request&, httplib::Response& res) {
            res.status = 200;
            res.set_content(report_to_json(self.current_report()), "application/json");
        });
        if (!static_dir.empty()) server.set_mount_point("/", static_dir);
    }
};

HumanEvalService::HumanEvalService(std::vector<JudgmentTask> tasks, VoteLog& log, ReportOptions options,
                                   std::string static_dir)
    : impl_(std::make_unique<Impl>(std::move(tasks), log, std::move(options), std::move(static_dir))) {
    if (impl_->options.panel_size == 0 || impl_->options.panel_size % 2 == 0)
        throw std::invalid_argument("panel size must be odd");
    for (std::size_t i = 0; i < impl_->tasks.size(); ++i)
        if (!impl_->index.emplace(impl_->tasks[i].task_id, i).second)
            throw std::invalid_argument("duplicate task id " + impl_->tasks[i].task_id);
    impl_->next_session = log.annotators().size();
    impl_->routes(*this);
}

HumanEvalService::~HumanEvalService() {
    stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int HumanEvalService::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    if (!impl_->server.bind_to_port(host, port)) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HumanEvalService::listen() { impl_->server.listen_after_bind(); }

void HumanEvalService::start() {
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HumanEvalService::stop() { impl_->server.stop(); }

std::string HumanEvalService::new_session() {
    std::lock_guard lock(impl_->session_mu);
    const auto existing = impl_->log.annotators();
    std::string id;
    do {
        id = "annotator-" + std::to_string(++impl_->next_session);
    } while (existing.contains(id));
    return id;
}

std::optional<JudgmentTask> HumanEvalService::next_task(const std::string& annotator_id) const {
    for (const auto& task : impl_->tasks) {
        if (impl_->log.has_voted(task.task_id, annotator_id)) continue;
        if (impl_->log.votes_for(task.task_id) >= impl_->options.panel_size) continue;
        return task;
    }
    return std::nullopt;
}

bool HumanEvalService::has_task(const std::string& task_id) const { return impl_->index.contains(task_id); }

EvalReport HumanEvalService::current_report() const {
    return report(impl_->tasks, impl_->log.snapshot(), impl_->options);
}

}  // namespace simseek
