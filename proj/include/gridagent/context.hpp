#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridagent/curtailment.hpp"
#include "gridagent/feeder.hpp"
#include "gridagent/infeasibility.hpp"
#include "gridagent/powerflow.hpp"

namespace gridagent {

// Read-only view of the data directory holding feeder files and datasets.
class DataStore {
public:
    DataStore() = default;
    explicit DataStore(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const { return root_; }

    bool exists(const std::string& name) const {
        return std::filesystem::exists(root_ / name);
    }

    std::string read(const std::string& name) const {
        std::ifstream in(root_ / name, std::ios::binary);
        if (!in) throw std::runtime_error("file not found: " + name);
        std::ostringstream out;
        out << in.rdbuf();
        return out.str();
    }

private:
    std::filesystem::path root_;
};

struct PendingArtifact {
    std::string kind;     // quantity plus extension, e.g. "voltages.csv"
    std::string filename; // run-relative, e.g. "2_voltages.csv"
    std::string content;
};

// Mutable state threaded through one workflow execution: the active network,
// the latest analysis results, the committed bus-voltage profile, and any
// artifacts waiting for a clean finish. One context is single-threaded.
struct ExecutionContext {
    DataStore store;
    std::string run_id = "run";
    std::filesystem::path artifact_root = "artifacts";

    std::optional<FeederNetwork> active;
    std::optional<PowerFlowSolution> solution;
    std::map<std::string, CurtailmentResult> curtailments;     // by norm name
    std::map<std::string, InfeasibilityResult> infeasibilities; // by norm name
    std::string last_curtailment_norm;
    std::string last_infeasibility_norm;
    std::set<std::string> applied; // "curtailment:l1", "slack:l2", ...

    // Committed voltage profile: flat after load, refreshed by update_* tools.
    std::map<int, double> profile;
    bool profile_simulated = false;

    std::vector<PendingArtifact> pending_artifacts;
    size_t current_step = 0; // set by the executor before each call

    void reset_for_network(const FeederNetwork& net) {
        active = net;
        solution.reset();
        curtailments.clear();
        infeasibilities.clear();
        last_curtailment_norm.clear();
        last_infeasibility_norm.clear();
        applied.clear();
        profile.clear();
        for (const auto& b : net.buses) profile[b.id] = 1.0;
        profile_simulated = false;
    }

    void commit_profile(const PowerFlowSolution& sol) {
        profile = sol.voltage;
        profile_simulated = true;
    }

    std::filesystem::path run_dir() const { return artifact_root / run_id; }

    // Called by the executor after a clean run; failures never touch disk.
    std::vector<std::filesystem::path> flush_artifacts() {
        std::vector<std::filesystem::path> written;
        if (pending_artifacts.empty()) return written;
        std::filesystem::create_directories(run_dir());
        for (const auto& art : pending_artifacts) {
            const auto path = run_dir() / art.filename;
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            out << art.content;
            written.push_back(path);
        }
        return written;
    }
};

} // namespace gridagent
