#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridagent/descriptor.hpp"
#include "gridagent/exemplar.hpp"
#include "gridagent/workflow.hpp"

namespace gridagent {

// One completed loop iteration: the attempted workflow, the exit strings it
// produced (possibly truncated by a failure), and the error context if any.
struct HistoryEntry {
    Workflow workflow;
    std::vector<std::string> exit_strings;
    std::optional<std::string> error;
};

// Append-only within a session; one entry per iteration.
struct ConversationHistory {
    std::vector<HistoryEntry> entries;

    void append(HistoryEntry e) { entries.push_back(std::move(e)); }
    bool empty() const { return entries.empty(); }
    size_t size() const { return entries.size(); }
};

// Everything the next LLM call sees. Rendering is a pure function of the
// fields: fixed section order, stable templates, no timestamps.
struct Prompt {
    std::string query;
    std::vector<ExpertPair> exemplars; // already in selector rank order
    ConversationHistory history;
    DescriptorSet descriptors; // descriptions possibly stripped by mode

    static constexpr const char* kPreamble =
        "You are an assistant for distribution-grid analysis. Answer the query by "
        "returning an ordered workflow of tool calls from the available functions. "
        "Call the tools in execution order; do not invent function names or "
        "parameters. After results are reported back, reply with exactly "
        "WORKFLOW_COMPLETE if the query is fully answered, otherwise return a "
        "corrected workflow.";

    std::string render_descriptor_block() const {
        std::string out = "## Available functions\n";
        for (const auto& d : descriptors.items()) {
            out += "- " + d.name + "(";
            for (size_t i = 0; i < d.params.size(); ++i) {
                if (i) out += ", ";
                out += d.params[i].name + ": " + param_type_name(d.params[i].type);
                if (d.params[i].type == ParamType::Enum) {
                    out += "[";
                    for (size_t v = 0; v < d.params[i].values.size(); ++v) {
                        if (v) out += "|";
                        out += d.params[i].values[v];
                    }
                    out += "]";
                }
                if (!d.params[i].required) out += "?";
            }
            out += ")";
            if (!d.description.empty()) out += ": " + d.description;
            out += "\n";
        }
        return out;
    }

    std::string render_exemplar_block() const {
        if (exemplars.empty()) return "";
        std::string out = "## Worked examples\n";
        for (const auto& pair : exemplars) {
            out += "Query: " + pair.query + "\n";
            out += "Workflow: " + serialize_workflow(pair.workflow) + "\n";
        }
        return out;
    }

    std::string render_history_block() const {
        if (history.empty()) return "";
        std::string out = "## Session history\n";
        for (size_t i = 0; i < history.entries.size(); ++i) {
            const HistoryEntry& e = history.entries[i];
            out += "Attempt " + std::to_string(i + 1) + ":\n";
            out += "Workflow: " + serialize_workflow(e.workflow) + "\n";
            if (!e.exit_strings.empty()) {
                out += "Exit strings:\n";
                for (size_t j = 0; j < e.exit_strings.size(); ++j)
                    out += "  " + std::to_string(j + 1) + ". " + e.exit_strings[j] + "\n";
            }
            if (e.error) out += "Error: " + *e.error + "\n";
        }
        return out;
    }

    std::string render_system() const {
        std::string out = kPreamble;
        out += "\n\n" + render_descriptor_block();
        const std::string ex = render_exemplar_block();
        if (!ex.empty()) out += "\n" + ex;
        return out;
    }

    std::string render_user() const {
        std::string out;
        const std::string h = render_history_block();
        if (!h.empty()) out += h + "\n";
        out += "## Query\n" + query;
        return out;
    }

    std::string render() const { return render_system() + "\n\n" + render_user(); }
};

} // namespace gridagent
