#pragma once

#include <string>
#include <vector>

#include "gridagent/context.hpp"
#include "gridagent/registry.hpp"
#include "gridagent/util.hpp"
#include "gridagent/workflow.hpp"

namespace gridagent {

enum class ExecStatus { Clean, Failed };

struct ExecutionOutcome {
    std::vector<std::string> exit_strings; // Y, in step order
    ExecStatus status = ExecStatus::Clean;
    size_t failed_step = 0;    // valid when Failed
    std::string failure;       // tool's one-line reason when Failed
    std::string digest;        // set on Clean
    std::vector<std::string> written_artifacts; // paths flushed on Clean

    bool clean() const { return status == ExecStatus::Clean; }

    // "step <i> <function>: <reason>" -- the error context fed back to the LLM.
    std::string error_context(const Workflow& w) const {
        if (clean()) return "";
        return "step " + std::to_string(failed_step) + " " + w.steps[failed_step].function +
               ": " + failure;
    }
};

// Canonical view of everything a workflow left behind, at fixed precision:
// numeric result vectors sorted by kind and bus, artifact kinds (never file
// paths), and the final exit string. Equal digests mean equal final results.
inline std::string result_digest(const ExecutionContext& ctx, const std::string& final_exit) {
    Json results = Json::object();
    auto put_series = [&](const std::string& kind, const std::map<int, double>& series) {
        Json rows = Json::array();
        for (const auto& [bus, value] : series) // std::map: ascending bus id
            rows.push_back({bus, format_fixed6(value)});
        results[kind] = rows;
    };
    if (!ctx.profile.empty()) put_series("profile", ctx.profile);
    if (ctx.solution) put_series("powerflow", ctx.solution->voltage);
    for (const auto& [norm, res] : ctx.curtailments) put_series("curtailment:" + norm, res.curtailed);
    for (const auto& [norm, res] : ctx.infeasibilities) {
        std::map<int, double> magnitudes;
        for (const auto& [bus, s] : res.slack) magnitudes[bus] = std::fabs(s);
        put_series("infeasibility:" + norm, magnitudes);
    }
    std::vector<std::string> kinds;
    for (const auto& art : ctx.pending_artifacts) kinds.push_back(art.kind);
    std::sort(kinds.begin(), kinds.end());

    Json canonical = {{"final", final_exit}, {"results", results}, {"artifacts", kinds}};
    return to_hex(fnv1a64(canonical.dump()));
}

// Strictly ordered execution; the first tool failure aborts and leaves the
// partial Y. Artifacts reach disk only after a clean run.
inline ExecutionOutcome execute_workflow(const Workflow& w, ExecutionContext& ctx,
                                         const Registry& registry) {
    ExecutionOutcome outcome;
    ctx.pending_artifacts.clear(); // artifacts are per-execution; failed runs leave none
    for (size_t i = 0; i < w.steps.size(); ++i) {
        const WorkflowStep& step = w.steps[i];
        const ToolBinding* binding = registry.lookup(step.function);
        if (!binding) {
            outcome.status = ExecStatus::Failed;
            outcome.failed_step = i;
            outcome.failure = "unknown function '" + step.function + "'";
            return outcome;
        }
        ctx.current_step = i;
        ToolResult result = binding->callable(ctx, step.args);
        if (!result.ok) {
            outcome.status = ExecStatus::Failed;
            outcome.failed_step = i;
            outcome.failure = result.text;
            return outcome;
        }
        outcome.exit_strings.push_back(result.text);
    }
    const std::string final_exit = outcome.exit_strings.empty() ? "" : outcome.exit_strings.back();
    outcome.digest = result_digest(ctx, final_exit);
    for (const auto& path : ctx.flush_artifacts())
        outcome.written_artifacts.push_back(path.string());
    return outcome;
}

} // namespace gridagent
