#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gridagent/embedding.hpp"
#include "gridagent/llm.hpp"
#include "gridagent/orchestrator.hpp"

namespace gridagent {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LlmProfile {
    std::string type = "mock"; // "mock" | "openai"
    std::string model = "mock";
    std::string base_url;
    std::string path = "/v1/chat/completions";
    std::string api_key_env;
    int timeout_seconds = 120;
    int retries = 2;
    int min_request_interval_ms = 0;
    std::filesystem::path script;  // mock: one session's turns
    std::filesystem::path scripts; // mock: map query-id -> turns (bench)
};

struct EmbedderProfile {
    std::string type = "hashed-bow"; // "hashed-bow" | "remote"
    std::string base_url;
    std::string model;
    std::string api_key_env;
};

// App configuration, JSON file; relative paths resolve against the config
// file's directory.
struct AppConfig {
    std::filesystem::path data_root = "data";
    std::filesystem::path out_dir = "out";
    std::filesystem::path exemplars = "data/exemplars.json";
    std::filesystem::path embedding_cache_dir;
    ModeConfig mode{Mode::Full, 5};
    int max_iterations = 8;
    LlmProfile llm;
    EmbedderProfile embedder;

    static AppConfig load(const std::filesystem::path& file) {
        std::ifstream in(file);
        if (!in) throw ConfigError("cannot open config file: " + file.string());
        Json j = Json::parse(in, nullptr, false);
        if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + file.string());
        AppConfig cfg;
        const auto base = std::filesystem::absolute(file).parent_path();
        auto resolve = [&](const std::string& p) -> std::filesystem::path {
            if (p.empty()) return {};
            std::filesystem::path path(p);
            return path.is_absolute() ? path : base / path;
        };
        cfg.data_root = resolve(j.value("data_root", "data"));
        cfg.out_dir = resolve(j.value("out_dir", "out"));
        cfg.exemplars = resolve(j.value("exemplars", "exemplars.json"));
        cfg.embedding_cache_dir = resolve(j.value("embedding_cache_dir", ""));
        if (j.contains("mode")) {
            auto m = mode_from_string(j["mode"].get<std::string>());
            if (!m) throw ConfigError("unknown mode in config: " + j["mode"].get<std::string>());
            cfg.mode.mode = *m;
        }
        cfg.mode.k = j.value("k", 5);
        cfg.max_iterations = j.value("max_iterations", 8);
        if (j.contains("llm")) {
            const Json& l = j["llm"];
            cfg.llm.type = l.value("type", "mock");
            cfg.llm.model = l.value("model", cfg.llm.type == "mock" ? "mock" : "");
            cfg.llm.base_url = l.value("base_url", "");
            cfg.llm.path = l.value("path", "/v1/chat/completions");
            cfg.llm.api_key_env = l.value("api_key_env", "");
            cfg.llm.timeout_seconds = l.value("timeout_seconds", 120);
            cfg.llm.retries = l.value("retries", 2);
            cfg.llm.min_request_interval_ms = l.value("min_request_interval_ms", 0);
            cfg.llm.script = resolve(l.value("script", ""));
            cfg.llm.scripts = resolve(l.value("scripts", ""));
        }
        if (j.contains("embedder")) {
            const Json& e = j["embedder"];
            cfg.embedder.type = e.value("type", "hashed-bow");
            cfg.embedder.base_url = e.value("base_url", "");
            cfg.embedder.model = e.value("model", "");
            cfg.embedder.api_key_env = e.value("api_key_env", "");
        }
        return cfg;
    }

    static std::string read_env_key(const std::string& var) {
        if (var.empty()) return "";
        const char* value = std::getenv(var.c_str());
        return value ? value : "";
    }

    // One-shot client for `query`/`repl`; bench builds per-attempt clients.
    std::unique_ptr<LlmClient> make_client() const {
        if (llm.type == "mock") {
            if (llm.script.empty())
                throw ConfigError("mock llm profile requires a \"script\" file for queries");
            return std::make_unique<ScriptedMock>(ScriptedMock::from_file(llm.script.string()));
        }
        if (llm.type == "openai") {
            if (llm.base_url.empty()) throw ConfigError("openai llm profile requires base_url");
            OpenAiClient::Options opts;
            opts.base_url = llm.base_url;
            opts.path = llm.path;
            opts.api_key = read_env_key(llm.api_key_env);
            opts.timeout_seconds = llm.timeout_seconds;
            opts.max_retries = llm.retries;
            opts.min_request_interval_ms = llm.min_request_interval_ms;
            return std::make_unique<OpenAiClient>(opts);
        }
        throw ConfigError("unknown llm profile type: " + llm.type);
    }

    std::unique_ptr<Embedder> make_embedder() const {
        if (embedder.type == "hashed-bow") return std::make_unique<HashedBowEmbedder>();
        if (embedder.type == "remote") {
            if (embedder.base_url.empty())
                throw ConfigError("remote embedder profile requires base_url");
            return std::make_unique<RemoteEmbedder>(embedder.base_url, embedder.model,
                                                    read_env_key(embedder.api_key_env));
        }
        throw ConfigError("unknown embedder profile type: " + embedder.type);
    }
};

// Per-query scripted turns, used by mock-backed benchmark runs.
class ScriptBook {
public:
    static ScriptBook from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open mock scripts file: " + path.string());
        ScriptBook book;
        book.turns_ = Json::parse(in);
        return book;
    }

    bool has(const std::string& query_id) const { return turns_.contains(query_id); }

    std::unique_ptr<LlmClient> make_client(const std::string& query_id) const {
        if (!turns_.contains(query_id))
            throw ConfigError("mock scripts file has no entry for query " + query_id);
        return std::make_unique<ScriptedMock>(ScriptedMock::from_json(turns_[query_id]));
    }

private:
    Json turns_;
};

} // namespace gridagent
