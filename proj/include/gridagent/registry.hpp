#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>

#include "gridagent/context.hpp"
#include "gridagent/descriptor.hpp"

namespace gridagent {

// A tool either returns a one-line exit string or a one-line machine-readable
// failure reason; the reason is fed back verbatim into the correction loop.
struct ToolResult {
    bool ok = true;
    std::string text;

    static ToolResult success(std::string exit_string) { return {true, std::move(exit_string)}; }
    static ToolResult failure(std::string reason) { return {false, std::move(reason)}; }
};

using ToolCallable = std::function<ToolResult(ExecutionContext&, const Json&)>;

struct ToolBinding {
    FunctionDescriptor descriptor;
    ToolCallable callable;
};

struct DuplicateToolError : std::runtime_error {
    explicit DuplicateToolError(const std::string& name)
        : std::runtime_error("tool already registered: " + name) {}
};

// The runtime function pool. Frozen after startup: register everything, then
// share it read-only across sessions.
class Registry {
public:
    void add(ToolBinding binding) {
        const std::string& name = binding.descriptor.name;
        if (bindings_.count(name)) throw DuplicateToolError(name);
        bindings_.emplace(name, std::move(binding));
    }

    const ToolBinding* lookup(const std::string& name) const {
        auto it = bindings_.find(name);
        return it == bindings_.end() ? nullptr : &it->second;
    }

    size_t size() const { return bindings_.size(); }

    // Lexicographic by name; with include_descriptions=false every d_i is
    // stripped while names and params stay intact.
    DescriptorSet export_descriptors(bool include_descriptions = true) const {
        DescriptorSet set;
        for (const auto& [name, binding] : bindings_) {
            FunctionDescriptor d = binding.descriptor;
            if (!include_descriptions) d.description.clear();
            set.add(std::move(d));
        }
        return set;
    }

private:
    std::map<std::string, ToolBinding> bindings_;
};

} // namespace gridagent
