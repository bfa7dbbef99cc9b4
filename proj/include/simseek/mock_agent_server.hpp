#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "simseek/agents.hpp"

namespace simseek {

/// Fault injection for the mock server.
struct MockAgentBehavior {
    enum class Reply { normal, malformed_json, missing_outputs, wrong_request_id };

    int fail_first_n = 0;  // answer the first n requests with fail_status; negative = always
    int fail_status = 503;
    std::chrono::milliseconds delay{0};  // sleep before replying
    Reply reply = Reply::normal;
};

/// Local HTTP server speaking the agent wire protocol on 127.0.0.1 (random
/// port). Requests are answered by the scripted agents: span-extractor for
/// cae, template-questioner for cqg_*, lexical-answerer for caf.
class MockAgentServer {
public:
    explicit MockAgentServer(MockAgentBehavior behavior = {}, int port = 0);
    ~MockAgentServer();

    MockAgentServer(const MockAgentServer&) = delete;
    MockAgentServer& operator=(const MockAgentServer&) = delete;

    int port() const;
    std::string address() const;

    void set_behavior(MockAgentBehavior behavior);
    std::size_t request_count() const;
    std::vector<std::string> request_bodies() const;

    /// Blocks until stop() is called from another thread.
    void wait();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace simseek
