#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gridagent/util.hpp"

namespace gridagent {

using Json = nlohmann::json;

// One (function, arguments) pair of a workflow. Argument values stay as JSON
// literals; equality semantics live in canonical_arg_value below.
struct WorkflowStep {
    std::string function;
    Json args = Json::object();
};

// An ordered, linear sequence of steps. Immutable by convention after
// construction; all operations on it are pure.
struct Workflow {
    std::vector<WorkflowStep> steps;

    size_t size() const { return steps.size(); }
    bool empty() const { return steps.empty(); }
};

struct ParseError {
    int step = -1; // -1: document-level, otherwise offending step index
    std::string reason;

    std::string to_string() const {
        if (step < 0) return reason;
        return "step " + std::to_string(step) + ": " + reason;
    }
};

using WorkflowParse = Expected<Workflow, ParseError>;

// Wire format: JSON array of {"function": string, "args": object}.
inline Json workflow_to_json(const Workflow& w) {
    Json arr = Json::array();
    for (const auto& step : w.steps) {
        arr.push_back({{"function", step.function}, {"args", step.args}});
    }
    return arr;
}

inline std::string serialize_workflow(const Workflow& w) {
    return workflow_to_json(w).dump();
}

inline WorkflowParse workflow_from_json(const Json& doc) {
    if (!doc.is_array()) return ParseError{-1, "expected a JSON array of steps"};
    Workflow w;
    for (size_t i = 0; i < doc.size(); ++i) {
        const Json& item = doc[i];
        int idx = static_cast<int>(i);
        if (!item.is_object()) return ParseError{idx, "step is not an object"};
        if (!item.contains("function")) return ParseError{idx, "missing function name"};
        if (!item["function"].is_string()) return ParseError{idx, "function name is not a string"};
        WorkflowStep step;
        step.function = item["function"].get<std::string>();
        if (step.function.empty()) return ParseError{idx, "empty function name"};
        if (item.contains("args")) {
            if (!item["args"].is_object()) return ParseError{idx, "args is not an object"};
            step.args = item["args"];
        }
        w.steps.push_back(std::move(step));
    }
    return w;
}

inline WorkflowParse parse_workflow(const std::string& text) {
    Json doc = Json::parse(text, nullptr, false);
    if (doc.is_discarded()) return ParseError{-1, "malformed JSON"};
    return workflow_from_json(doc);
}

// Canonical form of an argument value for equality checks: numbers and
// numeric strings collapse to one numeric key, every other string compares
// case-insensitively. The sentinel "all" is not numeric, so it never equals
// an integer.
inline std::string canonical_arg_value(const Json& v) {
    if (v.is_number()) return "n:" + format_fixed6(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "b:true" : "b:false";
    if (v.is_string()) {
        const std::string& s = v.get<std::string>();
        if (auto num = parse_number(s)) return "n:" + format_fixed6(*num);
        return "s:" + lowercase(s);
    }
    return "j:" + v.dump();
}

inline bool args_equal(const Json& a, const Json& b) {
    if (a.size() != b.size()) return false;
    for (auto it = a.begin(); it != a.end(); ++it) {
        auto jt = b.find(it.key());
        if (jt == b.end()) return false;
        if (canonical_arg_value(it.value()) != canonical_arg_value(jt.value())) return false;
    }
    return true;
}

// Exact-match equality: same length, same function names in order, and
// argument maps equal after canonicalization.
inline bool workflow_equal(const Workflow& a, const Workflow& b) {
    if (a.steps.size() != b.steps.size()) return false;
    for (size_t i = 0; i < a.steps.size(); ++i) {
        if (a.steps[i].function != b.steps[i].function) return false;
        if (!args_equal(a.steps[i].args, b.steps[i].args)) return false;
    }
    return true;
}

} // namespace gridagent
