// Stand-alone mock agent server for trying remote endpoints locally.
#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "simseek/mock_agent_server.hpp"

namespace {
std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mock generation agent speaking the simseek wire protocol", "simseek-mock-agent"};
    int port = 0;
    int fail_first = 0;
    int delay_ms = 0;
    app.add_option("--port", port, "Port (0 picks a free one)");
    app.add_option("--fail-first", fail_first, "Answer the first n requests with 503");
    app.add_option("--delay-ms", delay_ms, "Delay before every reply");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    simseek::MockAgentBehavior behavior;
    behavior.fail_first_n = fail_first;
    behavior.delay = std::chrono::milliseconds(delay_ms);
    try {
        simseek::MockAgentServer server(behavior, port);
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        std::cout << "listening on " << server.address() << std::endl;
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
