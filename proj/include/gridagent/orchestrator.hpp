#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gridagent/context.hpp"
#include "gridagent/descriptor.hpp"
#include "gridagent/executor.hpp"
#include "gridagent/exemplar.hpp"
#include "gridagent/llm.hpp"
#include "gridagent/prompt.hpp"
#include "gridagent/registry.hpp"
#include "gridagent/workflow.hpp"

namespace gridagent {

enum class Mode { ZeroCtx, Mini, Full, TopK };

inline std::optional<Mode> mode_from_string(const std::string& s) {
    const std::string m = lowercase(s);
    if (m == "zeroctx") return Mode::ZeroCtx;
    if (m == "mini") return Mode::Mini;
    if (m == "full") return Mode::Full;
    if (m == "topk") return Mode::TopK;
    return std::nullopt;
}

inline std::string mode_name(Mode m) {
    switch (m) {
        case Mode::ZeroCtx: return "zeroctx";
        case Mode::Mini: return "mini";
        case Mode::Full: return "full";
        case Mode::TopK: return "topk";
    }
    return "full";
}

struct ModeConfig {
    Mode mode = Mode::Full;
    size_t k = 5; // used by TopK only
};

// Exact sentinel for the completion-judgment protocol.
constexpr const char* kCompletionSentinel = "WORKFLOW_COMPLETE";

struct SessionConfig {
    ModeConfig mode;
    int max_iterations = 8;
    std::string model = "mock";
    double temperature = 0.0;
    const Registry* registry = nullptr;
    ExemplarCorpus* corpus = nullptr;   // required for Full/TopK
    Embedder* embedder = nullptr;       // required for TopK
    std::filesystem::path embedding_cache_dir; // empty: in-memory only
};

enum class SessionStatus { Completed, Exhausted };

struct SessionResult {
    SessionStatus status = SessionStatus::Exhausted;
    Workflow final_workflow;                 // accepted workflow on Completed, last attempt otherwise
    std::vector<std::string> final_exit_strings;
    std::string digest;                      // result digest of the accepted execution
    std::string last_error;                  // set when Exhausted
    bool transport_failure = false;          // session aborted by LlmTransportError
    int iterations = 0;
    long long total_tokens = 0;
    long long function_calls = 0;
    ConversationHistory history;
    Json transcript = Json::array();

    bool completed() const { return status == SessionStatus::Completed; }
};

// Mode-dependent prompt assembly: ZeroCtx strips descriptions and exemplars,
// Mini keeps descriptions, Full adds the whole corpus, TopK adds the ranked
// subset. History is always included.
inline Prompt build_prompt(const std::string& query, const SessionConfig& cfg,
                           const ConversationHistory& history) {
    if (!cfg.registry) throw std::invalid_argument("session config without registry");
    Prompt p;
    p.query = query;
    p.history = history;
    switch (cfg.mode.mode) {
        case Mode::ZeroCtx:
            p.descriptors = cfg.registry->export_descriptors(false);
            break;
        case Mode::Mini:
            p.descriptors = cfg.registry->export_descriptors(true);
            break;
        case Mode::Full:
            p.descriptors = cfg.registry->export_descriptors(true);
            if (!cfg.corpus) throw std::invalid_argument("full mode requires an exemplar corpus");
            p.exemplars = cfg.corpus->pairs();
            break;
        case Mode::TopK: {
            p.descriptors = cfg.registry->export_descriptors(true);
            if (!cfg.corpus || !cfg.embedder)
                throw std::invalid_argument("topk mode requires a corpus and an embedder");
            auto ranked = select_top_k(query, *cfg.corpus, *cfg.embedder, cfg.mode.k,
                                       cfg.embedding_cache_dir);
            for (const auto& r : ranked) p.exemplars.push_back(cfg.corpus->pairs()[r.index]);
            break;
        }
    }
    return p;
}

struct JudgmentComplete {};

using LlmTurn = std::variant<Workflow, JudgmentComplete, ParseError>;

// Tool-call payloads become a Workflow via the wire-format parser (argument
// text is passed through verbatim, so malformed arguments surface as parse
// errors with the step position). The bare sentinel becomes a completion
// judgment. Anything else is a parse error.
inline LlmTurn parse_llm_response(const CompletionResponse& resp) {
    if (!resp.tool_calls.empty()) {
        std::string wire = "[";
        for (size_t i = 0; i < resp.tool_calls.size(); ++i) {
            if (i) wire += ",";
            const std::string& args = resp.tool_calls[i].arguments;
            wire += "{\"function\":" + Json(resp.tool_calls[i].function).dump() +
                    ",\"args\":" + (trim(args).empty() ? "{}" : args) + "}";
        }
        wire += "]";
        auto parsed = parse_workflow(wire);
        if (parsed.ok()) return parsed.value();
        return parsed.error();
    }
    if (trim(resp.text) == kCompletionSentinel) return JudgmentComplete{};
    if (trim(resp.text).empty()) return ParseError{-1, "empty response"};
    return ParseError{-1, "response carries neither tool calls nor the completion sentinel"};
}

namespace detail {

inline CompletionRequest make_request(const Prompt& prompt, const SessionConfig& cfg,
                                      bool judgment) {
    CompletionRequest req;
    req.model = cfg.model;
    req.temperature = cfg.temperature;
    req.tools = prompt.descriptors;
    std::string user = prompt.render_user();
    if (judgment)
        user += "\n\nThe last workflow executed cleanly; its exit strings are in the session "
                "history. Reply with exactly WORKFLOW_COMPLETE if the query is fully answered, "
                "otherwise return a corrected workflow.";
    req.messages.push_back({"system", prompt.render_system()});
    req.messages.push_back({"user", user});
    return req;
}

inline Json call_record(const char* kind, const Prompt& prompt, const CompletionResponse& resp) {
    Json calls = Json::array();
    for (const auto& tc : resp.tool_calls)
        calls.push_back({{"function", tc.function}, {"arguments", tc.arguments}});
    return {{"kind", kind},
            {"prompt_digest", to_hex(fnv1a64(prompt.render()))},
            {"response_text", resp.text},
            {"tool_calls", calls},
            {"usage", {{"prompt_tokens", resp.usage.prompt_tokens},
                       {"completion_tokens", resp.usage.completion_tokens}}}};
}

} // namespace detail

// The recursive core: build the prompt, obtain a workflow, validate, execute,
// feed errors back, and stop on the LLM's completion judgment or when the
// iteration budget runs out. One session drives one execution context.
inline SessionResult run_session(const std::string& query, const SessionConfig& cfg,
                                 LlmClient& llm, ExecutionContext& ctx) {
    if (query.empty()) throw std::invalid_argument("query must be nonempty");
    if (!cfg.registry) throw std::invalid_argument("session config without registry");
    if (cfg.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");

    SessionResult result;
    const DescriptorSet validation_set = cfg.registry->export_descriptors(true);
    std::optional<Workflow> pending_revision; // judgment turn may hand back a fix directly

    for (int k = 1; k <= cfg.max_iterations; ++k) {
        result.iterations = k;
        Json iteration_record = {{"iteration", k}, {"calls", Json::array()}};

        Workflow candidate;
        if (pending_revision) {
            candidate = std::move(*pending_revision);
            pending_revision.reset();
        } else {
            Prompt prompt = build_prompt(query, cfg, result.history);
            CompletionResponse resp;
            try {
                resp = llm.complete(detail::make_request(prompt, cfg, false));
            } catch (const LlmTransportError& e) {
                result.last_error = e.what();
                result.transport_failure = true;
                result.transcript.push_back(iteration_record);
                return result;
            }
            result.total_tokens += resp.usage.total();
            iteration_record["calls"].push_back(detail::call_record("generation", prompt, resp));

            LlmTurn turn = parse_llm_response(resp);
            if (std::holds_alternative<ParseError>(turn)) {
                const std::string reason =
                    "response parse error: " + std::get<ParseError>(turn).to_string();
                result.history.append({Workflow{}, {}, reason});
                result.last_error = reason;
                iteration_record["error"] = reason;
                result.transcript.push_back(iteration_record);
                continue;
            }
            if (std::holds_alternative<JudgmentComplete>(turn)) {
                // A completion signal with no executed workflow to accept.
                const std::string reason = "completion signal before any clean execution";
                result.history.append({Workflow{}, {}, reason});
                result.last_error = reason;
                iteration_record["error"] = reason;
                result.transcript.push_back(iteration_record);
                continue;
            }
            candidate = std::get<Workflow>(turn);
        }

        iteration_record["workflow"] = workflow_to_json(candidate);
        result.final_workflow = candidate;

        ValidationReport report = validate_workflow(candidate, validation_set);
        if (!report.valid()) {
            const std::string reason = "validation: " + report.to_string();
            result.history.append({candidate, {}, reason});
            result.last_error = reason;
            iteration_record["error"] = reason;
            result.transcript.push_back(iteration_record);
            continue;
        }

        ExecutionOutcome outcome = execute_workflow(candidate, ctx, *cfg.registry);
        result.function_calls += static_cast<long long>(outcome.exit_strings.size());
        if (!outcome.clean()) ++result.function_calls; // the failing call was still made
        iteration_record["exit_strings"] = outcome.exit_strings;

        if (!outcome.clean()) {
            const std::string reason = outcome.error_context(candidate);
            result.history.append({candidate, outcome.exit_strings, reason});
            result.last_error = reason;
            iteration_record["error"] = reason;
            result.transcript.push_back(iteration_record);
            continue;
        }

        result.history.append({candidate, outcome.exit_strings, std::nullopt});

        // Completion judgment: one extra LLM turn; its tokens count.
        Prompt judgment_prompt = build_prompt(query, cfg, result.history);
        CompletionResponse jresp;
        try {
            jresp = llm.complete(detail::make_request(judgment_prompt, cfg, true));
        } catch (const LlmTransportError& e) {
            result.last_error = e.what();
            result.transport_failure = true;
            result.transcript.push_back(iteration_record);
            return result;
        }
        result.total_tokens += jresp.usage.total();
        iteration_record["calls"].push_back(detail::call_record("judgment", judgment_prompt, jresp));
        result.transcript.push_back(iteration_record);

        LlmTurn judgment = parse_llm_response(jresp);
        if (std::holds_alternative<JudgmentComplete>(judgment)) {
            result.status = SessionStatus::Completed;
            result.final_exit_strings = outcome.exit_strings;
            result.digest = outcome.digest;
            result.last_error.clear();
            return result;
        }
        if (std::holds_alternative<Workflow>(judgment)) {
            // Tool calls on the judgment turn signal a revision; run it next.
            pending_revision = std::get<Workflow>(judgment);
            result.last_error = "judgment requested a revised workflow";
            continue;
        }
        result.last_error = "judgment response unreadable: " +
                            std::get<ParseError>(judgment).to_string();
    }
    return result;
}

inline Json session_transcript(const std::string& query, const SessionConfig& cfg,
                               const SessionResult& r) {
    return {{"query", query},
            {"mode", mode_name(cfg.mode.mode)},
            {"model", cfg.model},
            {"status", r.completed() ? "completed" : "exhausted"},
            {"iterations", r.iterations},
            {"total_tokens", r.total_tokens},
            {"function_calls", r.function_calls},
            {"digest", r.digest},
            {"last_error", r.last_error},
            {"final_workflow", workflow_to_json(r.final_workflow)},
            {"iterations_detail", r.transcript}};
}

} // namespace gridagent
