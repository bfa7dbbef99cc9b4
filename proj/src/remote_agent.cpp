#include <atomic>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "simseek/agents.hpp"

namespace simseek {

using nlohmann::json;

HostPort parse_address(std::string_view address) {
    constexpr std::string_view scheme = "http://";
    if (!address.starts_with(scheme)) throw std::invalid_argument("agent address must start with http://");
    std::string_view rest = address.substr(scheme.size());
    if (rest.ends_with('/')) rest.remove_suffix(1);
    if (rest.find('/') != std::string_view::npos) throw std::invalid_argument("agent address must not carry a path");

    HostPort hp;
    const auto colon = rest.rfind(':');
    if (colon == std::string_view::npos) {
        hp.host = std::string(rest);
    } else {
        hp.host = std::string(rest.substr(0, colon));
        const std::string port(rest.substr(colon + 1));
        if (port.empty() || port.find_first_not_of("0123456789") != std::string::npos || port.size() > 5)
            throw std::invalid_argument("invalid port in agent address");
        hp.port = std::stoi(port);
    }
    if (hp.host.empty()) throw std::invalid_argument("agent address has no host");
    if (hp.port < 1 || hp.port > 65535) throw std::invalid_argument("agent port out of range");
    return hp;
}

void validate(const AgentEndpoint& endpoint) {
    validate(endpoint.generation);
    if (endpoint.retries < 0) throw std::invalid_argument("retries must be >= 0");
    if (endpoint.max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
    if (endpoint.timeout.count() <= 0) throw std::invalid_argument("timeout must be positive");
    if (const auto* remote = std::get_if<RemoteKind>(&endpoint.kind)) parse_address(remote->address);
}

std::string wire_request(const PromptBundle& bundle, const GenerationConfig& generation,
                         const std::string& request_id) {
    json body{{"role", to_string(bundle.role)},
              {"prompt", bundle.text},
              {"generation",
               {{"beam_size", generation.beam_size},
                {"top_p", generation.top_p},
                {"temperature", generation.temperature},
                {"max_new_tokens", generation.max_new_tokens}}},
              {"request_id", request_id}};
    if (!bundle.context.empty()) body["context"] = bundle.context;
    return body.dump();
}

AgentResponse parse_wire_reply(std::string_view body, Role role, const std::string& request_id) {
    const json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProtocolError("reply is not a JSON object");
    const auto rid = j.find("request_id");
    if (rid == j.end() || !rid->is_string()) throw ProtocolError("reply has no request_id");
    if (rid->get<std::string>() != request_id)
        throw ProtocolError("reply request_id " + rid->get<std::string>() + " does not match " + request_id);
    const auto outs = j.find("outputs");
    if (outs == j.end() || !outs->is_array()) throw ProtocolError("reply has no outputs array");

    AgentResponse response;
    for (const auto& o : *outs) {
        if (!o.is_object()) throw ProtocolError("output entry is not an object");
        const auto text = o.find("text");
        const auto score = o.find("score");
        if (text == o.end() || !text->is_string()) throw ProtocolError("output entry has no text");
        if (score == o.end() || !score->is_number()) throw ProtocolError("output entry has no numeric score");
        AgentOutput out{text->get<std::string>(), std::nullopt, score->get<double>()};
        const auto start = o.find("start");
        if (role == Role::cae && (start == o.end() || !start->is_number_unsigned()))
            throw ProtocolError("extractor output needs a non-negative start offset");
        if (start != o.end() && !start->is_null()) {
            if (!start->is_number_unsigned()) throw ProtocolError("start must be a non-negative integer");
            out.start = start->get<std::size_t>();
        }
        response.outputs.push_back(std::move(out));
    }
    if (const auto k = j.find("k"); k != j.end()) {
        if (!k->is_number_unsigned()) throw ProtocolError("k must be a non-negative integer");
        response.k = k->get<std::size_t>();
    }
    return response;
}

// ---------------------------------------------------------------------------

struct RemoteAgent::State {
    std::mutex mu;
    std::condition_variable cv;
    std::size_t in_flight = 0;
    std::atomic<std::uint64_t> next_id{0};
};

RemoteAgent::RemoteAgent(AgentEndpoint endpoint)
    : endpoint_(std::move(endpoint)), state_(std::make_unique<State>()) {
    validate(endpoint_);
    const auto* remote = std::get_if<RemoteKind>(&endpoint_.kind);
    if (!remote) throw std::invalid_argument("RemoteAgent needs a remote endpoint");
    target_ = parse_address(remote->address);
}

RemoteAgent::~RemoteAgent() = default;

std::string RemoteAgent::identity() const { return "remote:" + std::get<RemoteKind>(endpoint_.kind).address; }

AgentResponse RemoteAgent::invoke(const PromptBundle& bundle) const {
    {
        std::unique_lock lock(state_->mu);
        state_->cv.wait(lock, [&] { return state_->in_flight < endpoint_.max_in_flight; });
        ++state_->in_flight;
    }
    struct Release {
        State& s;
        ~Release() {
            {
                std::lock_guard lock(s.mu);
                --s.in_flight;
            }
            s.cv.notify_one();
        }
    } release{*state_};

    const std::string request_id = "req-" + std::to_string(state_->next_id++);
    const std::string body = wire_request(bundle, endpoint_.generation, request_id);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - seconds);

    std::string last_error;
    auto delay = endpoint_.backoff;
    for (int attempt = 0; attempt <= endpoint_.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
        httplib::Client client(target_.host, target_.port);
        client.set_connection_timeout(seconds.count(), micros.count());
        client.set_read_timeout(seconds.count(), micros.count());
        client.set_write_timeout(seconds.count(), micros.count());
        auto res = client.Post("/v1/generate", body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "HTTP status " + std::to_string(res->status);
            continue;
        }
        return parse_wire_reply(res->body, bundle.role, request_id);
    }
    throw TransportError(identity() + ": " + std::to_string(endpoint_.retries + 1) +
                         " attempts failed, last error: " + last_error);
}

AgentPtr make_agent(const AgentEndpoint& endpoint) {
    validate(endpoint);
    if (const auto* scripted = std::get_if<ScriptedKind>(&endpoint.kind)) return make_scripted_agent(scripted->name);
    return std::make_shared<RemoteAgent>(endpoint);
}

// ---------------------------------------------------------------------------
// Config file

namespace {

GenerationConfig merge_generation(GenerationConfig base, const json& j) {
    if (!j.is_object()) throw std::invalid_argument("generation must be an object");
    if (j.contains("beam_size")) base.beam_size = j["beam_size"].get<int>();
    if (j.contains("top_p")) base.top_p = j["top_p"].get<double>();
    if (j.contains("temperature")) base.temperature = j["temperature"].get<double>();
    if (j.contains("max_new_tokens")) base.max_new_tokens = j["max_new_tokens"].get<int>();
    validate(base);
    return base;
}

}  // namespace

const AgentEndpoint& AgentsConfig::at(const std::string& slot) const {
    const auto it = endpoints.find(slot);
    if (it == endpoints.end()) throw std::invalid_argument("agents config has no '" + slot + "' entry");
    return it->second;
}

AgentsConfig parse_agents_config(std::string_view json_text) {
    const json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded() || !root.is_object()) throw std::invalid_argument("agents config is not a JSON object");
    AgentsConfig cfg;
    try {
        if (root.contains("generation")) cfg.generation = merge_generation(cfg.generation, root["generation"]);
        for (const auto& [slot, entry] : root.items()) {
            if (slot == "generation") continue;
            if (!entry.is_object()) throw std::invalid_argument("agent entry '" + slot + "' must be an object");
            AgentEndpoint ep;
            if (entry.contains("scripted")) {
                ep.kind = ScriptedKind{entry["scripted"].get<std::string>()};
            } else if (entry.contains("remote")) {
                ep.kind = RemoteKind{entry["remote"].get<std::string>()};
            } else {
                throw std::invalid_argument("agent entry '" + slot + "' needs 'scripted' or 'remote'");
            }
            ep.generation = entry.contains("generation") ? merge_generation(cfg.generation, entry["generation"])
                                                         : cfg.generation;
            if (entry.contains("timeout_ms")) ep.timeout = std::chrono::milliseconds(entry["timeout_ms"].get<long>());
            if (entry.contains("retries")) ep.retries = entry["retries"].get<int>();
            if (entry.contains("max_in_flight")) ep.max_in_flight = entry["max_in_flight"].get<std::size_t>();
            if (entry.contains("backoff_ms")) ep.backoff = std::chrono::milliseconds(entry["backoff_ms"].get<long>());
            validate(ep);
            cfg.endpoints.emplace(slot, std::move(ep));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("agents config: ") + e.what());
    }
    return cfg;
}

AgentsConfig load_agents_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_agents_config(buf.str());
}

}  // namespace simseek
