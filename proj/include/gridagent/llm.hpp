#pragma once

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "gridagent/descriptor.hpp"
#include "gridagent/util.hpp"

namespace gridagent {

struct TokenUsage {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
    long long total() const { return prompt_tokens + completion_tokens; }
};

struct ChatMessage {
    std::string role; // system | user | assistant | tool
    std::string content;
};

struct ToolCall {
    std::string function;
    std::string arguments; // raw argument text, preserved verbatim
};

struct CompletionRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    DescriptorSet tools;
    double temperature = 0.0;
    long long max_tokens = 0; // 0: omit
};

struct CompletionResponse {
    std::string text;
    std::vector<ToolCall> tool_calls;
    TokenUsage usage;
};

struct LlmTransportError : std::runtime_error {
    int status = 0;
    std::string body;
    LlmTransportError(int s, std::string b)
        : std::runtime_error("llm transport error (HTTP " + std::to_string(s) + ")"),
          status(s), body(std::move(b)) {}
    explicit LlmTransportError(std::string reason)
        : std::runtime_error("llm transport error: " + reason), body(std::move(reason)) {}
};

// Protocol tool schema: one function entry per descriptor, lexicographic.
inline Json tools_to_json(const DescriptorSet& set) {
    Json arr = Json::array();
    for (const auto& d : set.items()) {
        Json properties = Json::object();
        Json required = Json::array();
        for (const auto& p : d.params) {
            Json prop;
            switch (p.type) {
                case ParamType::String: prop["type"] = "string"; break;
                case ParamType::Integer: prop["type"] = "integer"; break;
                case ParamType::Number: prop["type"] = "number"; break;
                case ParamType::Boolean: prop["type"] = "boolean"; break;
                case ParamType::Enum:
                    prop["type"] = "string";
                    prop["enum"] = p.values;
                    break;
                case ParamType::NetworkRef:
                    prop["type"] = "string";
                    prop["description"] = "network reference; use \"active\"";
                    break;
            }
            properties[p.name] = prop;
            if (p.required) required.push_back(p.name);
        }
        Json fn = {{"name", d.name},
                   {"parameters",
                    {{"type", "object"}, {"properties", properties}, {"required", required}}}};
        if (!d.description.empty()) fn["description"] = d.description;
        arr.push_back({{"type", "function"}, {"function", fn}});
    }
    return arr;
}

inline Json request_to_json(const CompletionRequest& req) {
    Json messages = Json::array();
    for (const auto& m : req.messages)
        messages.push_back({{"role", m.role}, {"content", m.content}});
    Json body = {{"model", req.model}, {"messages", messages}, {"temperature", req.temperature}};
    if (!req.tools.empty()) body["tools"] = tools_to_json(req.tools);
    if (req.max_tokens > 0) body["max_tokens"] = req.max_tokens;
    return body;
}

inline CompletionResponse response_from_json(const Json& doc) {
    CompletionResponse resp;
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
        throw LlmTransportError("response has no choices");
    const Json& message = doc["choices"][0].at("message");
    if (message.contains("content") && message["content"].is_string())
        resp.text = message["content"].get<std::string>();
    if (message.contains("tool_calls")) {
        for (const auto& tc : message["tool_calls"]) {
            ToolCall call;
            call.function = tc.at("function").at("name").get<std::string>();
            const Json& args = tc.at("function").at("arguments");
            call.arguments = args.is_string() ? args.get<std::string>() : args.dump();
            resp.tool_calls.push_back(std::move(call));
        }
    }
    if (doc.contains("usage")) {
        resp.usage.prompt_tokens = doc["usage"].value("prompt_tokens", 0LL);
        resp.usage.completion_tokens = doc["usage"].value("completion_tokens", 0LL);
    }
    if (resp.text.empty() && resp.tool_calls.empty())
        throw LlmTransportError("response carries neither content nor tool calls");
    return resp;
}

class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual CompletionResponse complete(const CompletionRequest& req) = 0;
    virtual std::string id() const = 0;
};

// OpenAI-compatible chat-completions transport with bounded retries and
// exponential backoff on 429/5xx. Requests are idempotent reads, so retrying
// never duplicates side effects.
class OpenAiClient : public LlmClient {
public:
    struct Options {
        std::string base_url;
        std::string path = "/v1/chat/completions";
        std::string api_key;
        int timeout_seconds = 120;
        int max_retries = 2;
        int backoff_ms = 250;
        int min_request_interval_ms = 0; // per-endpoint rate ceiling; 0 disables
    };

    explicit OpenAiClient(Options opts) : opts_(std::move(opts)) {}

    std::string id() const override { return "openai:" + opts_.base_url; }

    CompletionResponse complete(const CompletionRequest& req) override {
        throttle();
        const std::string payload = request_to_json(req).dump();
        int last_status = 0;
        std::string last_body;
        for (int attempt = 0; attempt <= opts_.max_retries; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(opts_.backoff_ms * (1 << (attempt - 1))));
            httplib::Client client(opts_.base_url);
            client.set_read_timeout(opts_.timeout_seconds, 0);
            client.set_connection_timeout(opts_.timeout_seconds, 0);
            httplib::Headers headers;
            if (!opts_.api_key.empty()) headers.insert({"Authorization", "Bearer " + opts_.api_key});
            auto res = client.Post(opts_.path, headers, payload, "application/json");
            if (!res) {
                last_status = 0;
                last_body = httplib::to_string(res.error());
                continue;
            }
            last_status = res->status;
            last_body = res->body;
            if (res->status == 429 || res->status >= 500) continue;
            if (res->status != 200) break;
            Json doc = Json::parse(res->body, nullptr, false);
            if (doc.is_discarded()) throw LlmTransportError("response is not valid JSON");
            return response_from_json(doc);
        }
        throw LlmTransportError(last_status, last_body);
    }

private:
    void throttle() {
        if (opts_.min_request_interval_ms <= 0) return;
        std::lock_guard<std::mutex> lock(throttle_mutex_);
        const auto now = std::chrono::steady_clock::now();
        const auto interval = std::chrono::milliseconds(opts_.min_request_interval_ms);
        if (last_request_ != std::chrono::steady_clock::time_point{} &&
            now - last_request_ < interval)
            std::this_thread::sleep_for(interval - (now - last_request_));
        last_request_ = std::chrono::steady_clock::now();
    }

    Options opts_;
    std::mutex throttle_mutex_;
    std::chrono::steady_clock::time_point last_request_{};
};

// Deterministic scripted client for offline tests and benchmark replays.
// Running past the end of the script is a hard error by design.
class ScriptedMock : public LlmClient {
public:
    ScriptedMock() = default;
    explicit ScriptedMock(std::vector<CompletionResponse> turns) : turns_(std::move(turns)) {}

    static CompletionResponse turn_from_json(const Json& j) {
        CompletionResponse resp;
        resp.text = j.value("text", "");
        for (const auto& tc : j.value("tool_calls", Json::array())) {
            ToolCall call;
            call.function = tc.at("function").get<std::string>();
            const Json& args = tc.contains("args") ? tc["args"] : Json::object();
            call.arguments = args.is_string() ? args.get<std::string>() : args.dump();
            resp.tool_calls.push_back(std::move(call));
        }
        if (j.contains("usage")) {
            resp.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0LL);
            resp.usage.completion_tokens = j["usage"].value("completion_tokens", 0LL);
        }
        return resp;
    }

    static ScriptedMock from_json(const Json& turns) {
        std::vector<CompletionResponse> list;
        for (const auto& t : turns) list.push_back(turn_from_json(t));
        return ScriptedMock(std::move(list));
    }

    static ScriptedMock from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open mock script: " + path);
        return from_json(Json::parse(in));
    }

    std::string id() const override { return "mock"; }

    CompletionResponse complete(const CompletionRequest& req) override {
        seen_requests.push_back(req);
        if (cursor_ >= turns_.size())
            throw std::logic_error("scripted mock exhausted after " +
                                   std::to_string(turns_.size()) + " turns");
        return turns_[cursor_++];
    }

    size_t turns_consumed() const { return cursor_; }

    std::vector<CompletionRequest> seen_requests;

private:
    std::vector<CompletionResponse> turns_;
    size_t cursor_ = 0;
};

} // namespace gridagent
