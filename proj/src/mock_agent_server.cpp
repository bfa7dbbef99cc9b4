#include "simseek/mock_agent_server.hpp"

#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace simseek {

using nlohmann::json;

struct MockAgentServer::Impl {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    mutable std::mutex mu;
    MockAgentBehavior behavior;
    std::vector<std::string> bodies;

    SpanExtractor extractor;
    TemplateQuestioner questioner;
    LexicalAnswerer answerer;

    void handle(const httplib::Request& req, httplib::Response& res) {
        MockAgentBehavior b;
        std::size_t index = 0;
        {
            std::lock_guard lock(mu);
            b = behavior;
            index = bodies.size();
            bodies.push_back(req.body);
        }
        if (b.delay.count() > 0) std::this_thread::sleep_for(b.delay);
        if (b.fail_first_n < 0 || index < static_cast<std::size_t>(b.fail_first_n)) {
            res.status = b.fail_status;
            res.set_content(R"({"error":"injected failure"})", "application/json");
            return;
        }

        const json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.contains("role") || !body.contains("prompt") ||
            !body.contains("request_id")) {
            res.status = 400;
            res.set_content(R"({"error":"bad request"})", "application/json");
            return;
        }

        PromptBundle bundle;
        AgentResponse response;
        try {
            bundle.role = role_from_string(body["role"].get<std::string>());
            bundle.text = body["prompt"].get<std::string>();
            bundle.context = body.value("context", std::string());
            // The prior-grounded questioner alternates by turn; recover it from
            // the number of history pairs before <mask>.
            if (bundle.role == Role::cqg_prior) {
                std::size_t seps = 0;
                const std::string sep = std::string(kSep);
                for (auto p = bundle.text.find(sep); p != std::string::npos; p = bundle.text.find(sep, p + 1)) ++seps;
                bundle.turn = seps <= 3 ? 1 : (seps - 3 + 1) / 2 + 1;
            }
            switch (bundle.role) {
                case Role::cae: response = extractor.invoke(bundle); break;
                case Role::cqg_answer:
                case Role::cqg_prior: response = questioner.invoke(bundle); break;
                case Role::caf: response = answerer.invoke(bundle); break;
            }
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            return;
        }

        switch (b.reply) {
            case MockAgentBehavior::Reply::malformed_json:
                res.set_content(R"({"request_id": "x", "outputs": [)", "application/json");
                return;
            case MockAgentBehavior::Reply::missing_outputs:
                res.set_content(json{{"request_id", body["request_id"]}}.dump(), "application/json");
                return;
            default: break;
        }

        json outputs = json::array();
        for (const auto& o : response.outputs) {
            json out{{"text", o.text}, {"score", o.score}};
            if (bundle.role == Role::cae || o.start) out["start"] = o.start ? json(*o.start) : json(nullptr);
            outputs.push_back(std::move(out));
        }
        json reply{{"request_id", b.reply == MockAgentBehavior::Reply::wrong_request_id
                                      ? json("not-" + body["request_id"].get<std::string>())
                                      : body["request_id"]},
                   {"outputs", std::move(outputs)}};
        if (response.k) reply["k"] = *response.k;
        res.set_content(reply.dump(), "application/json");
    }
};

MockAgentServer::MockAgentServer(MockAgentBehavior behavior, int port) : impl_(std::make_unique<Impl>()) {
    impl_->behavior = behavior;
    impl_->server.Post("/v1/generate",
                       [this](const httplib::Request& req, httplib::Response& res) { impl_->handle(req, res); });
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    } else {
        impl_->port = impl_->server.bind_to_port("127.0.0.1", port) ? port : -1;
    }
    if (impl_->port <= 0) throw std::runtime_error("mock agent server could not bind");
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

MockAgentServer::~MockAgentServer() {
    stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int MockAgentServer::port() const { return impl_->port; }

std::string MockAgentServer::address() const { return "http://127.0.0.1:" + std::to_string(impl_->port); }

void MockAgentServer::set_behavior(MockAgentBehavior behavior) {
    std::lock_guard lock(impl_->mu);
    impl_->behavior = behavior;
    impl_->bodies.clear();
}

std::size_t MockAgentServer::request_count() const {
    std::lock_guard lock(impl_->mu);
    return impl_->bodies.size();
}

std::vector<std::string> MockAgentServer::request_bodies() const {
    std::lock_guard lock(impl_->mu);
    return impl_->bodies;
}

void MockAgentServer::wait() {
    if (impl_->thread.joinable()) impl_->thread.join();
}

void MockAgentServer::stop() { impl_->server.stop(); }

}  // namespace simseek
