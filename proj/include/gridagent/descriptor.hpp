#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridagent/util.hpp"
#include "gridagent/workflow.hpp"

namespace gridagent {

enum class ParamType { String, Integer, Number, Boolean, Enum, NetworkRef };

inline std::string param_type_name(ParamType t) {
    switch (t) {
        case ParamType::String: return "string";
        case ParamType::Integer: return "integer";
        case ParamType::Number: return "number";
        case ParamType::Boolean: return "boolean";
        case ParamType::Enum: return "enum";
        case ParamType::NetworkRef: return "network-ref";
    }
    return "string";
}

inline std::optional<ParamType> param_type_from_name(const std::string& s) {
    if (s == "string") return ParamType::String;
    if (s == "integer") return ParamType::Integer;
    if (s == "number") return ParamType::Number;
    if (s == "boolean") return ParamType::Boolean;
    if (s == "enum") return ParamType::Enum;
    if (s == "network-ref") return ParamType::NetworkRef;
    return std::nullopt;
}

struct ParamSpec {
    std::string name;
    ParamType type = ParamType::String;
    bool required = true;
    std::vector<std::string> values; // enum values; nonempty iff type == Enum
};

// Machine-readable tool semantics: a unique name, an ordered parameter list,
// and an optional text description.
struct FunctionDescriptor {
    std::string name;
    std::vector<ParamSpec> params;
    std::string description; // empty means absent

    const ParamSpec* find_param(const std::string& pname) const {
        for (const auto& p : params)
            if (p.name == pname) return &p;
        return nullptr;
    }
};

class DescriptorSet {
public:
    DescriptorSet() = default;
    explicit DescriptorSet(std::vector<FunctionDescriptor> descriptors) {
        for (auto& d : descriptors) add(std::move(d));
    }

    void add(FunctionDescriptor d) {
        if (d.name.empty()) throw std::invalid_argument("descriptor name must be nonempty");
        if (find(d.name)) throw std::invalid_argument("duplicate descriptor name: " + d.name);
        std::map<std::string, bool> seen;
        for (const auto& p : d.params) {
            if (seen.count(p.name)) throw std::invalid_argument("duplicate param name: " + p.name + " in " + d.name);
            seen[p.name] = true;
            if (p.type == ParamType::Enum && p.values.empty())
                throw std::invalid_argument("enum param without values: " + p.name + " in " + d.name);
        }
        items_.push_back(std::move(d));
        std::sort(items_.begin(), items_.end(),
                  [](const FunctionDescriptor& a, const FunctionDescriptor& b) { return a.name < b.name; });
    }

    const FunctionDescriptor* find(const std::string& name) const {
        for (const auto& d : items_)
            if (d.name == name) return &d;
        return nullptr;
    }

    // Always lexicographically ordered by function name.
    const std::vector<FunctionDescriptor>& items() const { return items_; }
    size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }

private:
    std::vector<FunctionDescriptor> items_;
};

inline Json descriptor_to_json(const FunctionDescriptor& d) {
    Json params = Json::array();
    for (const auto& p : d.params) {
        Json values = p.values.empty() ? Json() : Json(p.values);
        params.push_back({{"name", p.name},
                          {"type", param_type_name(p.type)},
                          {"required", p.required},
                          {"values", values}});
    }
    return {{"name", d.name},
            {"description", d.description.empty() ? Json() : Json(d.description)},
            {"params", params}};
}

inline Json descriptor_set_to_json(const DescriptorSet& set) {
    Json arr = Json::array();
    for (const auto& d : set.items()) arr.push_back(descriptor_to_json(d));
    return arr;
}

inline FunctionDescriptor descriptor_from_json(const Json& j) {
    FunctionDescriptor d;
    d.name = j.at("name").get<std::string>();
    if (j.contains("description") && j["description"].is_string())
        d.description = j["description"].get<std::string>();
    for (const auto& pj : j.value("params", Json::array())) {
        ParamSpec p;
        p.name = pj.at("name").get<std::string>();
        auto t = param_type_from_name(pj.at("type").get<std::string>());
        if (!t) throw std::invalid_argument("unknown param type: " + pj.at("type").get<std::string>());
        p.type = *t;
        p.required = pj.value("required", true);
        if (pj.contains("values") && pj["values"].is_array())
            p.values = pj["values"].get<std::vector<std::string>>();
        d.params.push_back(std::move(p));
    }
    return d;
}

inline DescriptorSet descriptor_set_from_json(const Json& arr) {
    DescriptorSet set;
    for (const auto& j : arr) set.add(descriptor_from_json(j));
    return set;
}

enum class ViolationKind { UnknownFunction, UnknownParam, MissingRequiredParam, TypeMismatch };

struct Violation {
    ViolationKind kind;
    size_t step = 0;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool valid() const { return violations.empty(); }

    std::string to_string() const {
        std::string out;
        for (const auto& v : violations) {
            if (!out.empty()) out += "; ";
            out += "step " + std::to_string(v.step) + ": " + v.detail;
        }
        return out.empty() ? "valid" : out;
    }
};

// Accepts the looser value spellings LLMs produce: numeric strings for
// numbers, numbers for strings, case-insensitive enum values.
inline bool value_matches_type(const Json& v, const ParamSpec& p) {
    switch (p.type) {
        case ParamType::String:
            return v.is_string() || v.is_number();
        case ParamType::Integer:
            if (v.is_number_integer()) return true;
            if (v.is_number_float()) {
                double d = v.get<double>();
                return d == static_cast<long long>(d);
            }
            return v.is_string() && parse_int(v.get<std::string>()).has_value();
        case ParamType::Number:
            if (v.is_number()) return true;
            return v.is_string() && parse_number(v.get<std::string>()).has_value();
        case ParamType::Boolean:
            if (v.is_boolean()) return true;
            if (v.is_string()) {
                std::string s = lowercase(v.get<std::string>());
                return s == "true" || s == "false";
            }
            return false;
        case ParamType::Enum: {
            if (!v.is_string()) return false;
            std::string s = lowercase(v.get<std::string>());
            return std::any_of(p.values.begin(), p.values.end(),
                               [&](const std::string& allowed) { return lowercase(allowed) == s; });
        }
        case ParamType::NetworkRef:
            return v.is_string();
    }
    return false;
}

// Pre-execution gate: violations are data, not errors. Empty report == valid.
inline ValidationReport validate_workflow(const Workflow& w, const DescriptorSet& set) {
    ValidationReport report;
    for (size_t i = 0; i < w.steps.size(); ++i) {
        const WorkflowStep& step = w.steps[i];
        const FunctionDescriptor* d = set.find(step.function);
        if (!d) {
            report.violations.push_back({ViolationKind::UnknownFunction, i,
                                         "unknown function '" + step.function + "'"});
            continue;
        }
        for (auto it = step.args.begin(); it != step.args.end(); ++it) {
            const ParamSpec* p = d->find_param(it.key());
            if (!p) {
                report.violations.push_back({ViolationKind::UnknownParam, i,
                                             "unknown param '" + it.key() + "' for " + d->name});
                continue;
            }
            if (!value_matches_type(it.value(), *p)) {
                report.violations.push_back({ViolationKind::TypeMismatch, i,
                                             "param '" + p->name + "' of " + d->name +
                                                 " expects " + param_type_name(p->type)});
            }
        }
        for (const auto& p : d->params) {
            if (p.required && !step.args.contains(p.name)) {
                report.violations.push_back({ViolationKind::MissingRequiredParam, i,
                                             "missing required param '" + p.name + "' for " + d->name});
            }
        }
    }
    return report;
}

} // namespace gridagent
