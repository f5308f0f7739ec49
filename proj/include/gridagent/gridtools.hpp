#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridagent/artifacts.hpp"
#include "gridagent/context.hpp"
#include "gridagent/curtailment.hpp"
#include "gridagent/infeasibility.hpp"
#include "gridagent/powerflow.hpp"
#include "gridagent/registry.hpp"

namespace gridagent {
namespace gridtools {

// ---- shared helpers --------------------------------------------------------

inline std::optional<ToolResult> require_network(ExecutionContext& ctx, const Json& args,
                                                 bool expect_ref) {
    if (expect_ref) {
        if (!args.contains("network") || !args["network"].is_string())
            return ToolResult::failure("missing network reference");
        if (lowercase(args["network"].get<std::string>()) != "active")
            return ToolResult::failure("unknown network reference: " +
                                       args["network"].get<std::string>());
    }
    if (!ctx.active) return ToolResult::failure("network not loaded");
    return std::nullopt;
}

// "all" or a positive integer, accepted as string or number.
inline std::optional<size_t> parse_row_limit(const Json& args, const BusSeries& rows) {
    if (!args.contains("n")) return std::nullopt;
    const Json& v = args["n"];
    if (v.is_string() && lowercase(v.get<std::string>()) == "all") return rows.size();
    long long n = -1;
    if (v.is_number_integer()) n = v.get<long long>();
    else if (v.is_string()) {
        auto parsed = parse_int(v.get<std::string>());
        if (parsed) n = *parsed;
    }
    if (n <= 0) return std::nullopt;
    return std::min(rows.size(), static_cast<size_t>(n));
}

inline std::string format_ranked(const BusSeries& rows) {
    if (rows.empty()) return "none";
    std::string out;
    for (const auto& [bus, value] : rows) {
        if (!out.empty()) out += ", ";
        out += std::to_string(bus) + "=" + format_fixed6(value);
    }
    return out;
}

// Descending by value, ties by ascending bus id.
inline void rank_series(BusSeries& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
}

inline std::optional<CurtailNorm> curtail_norm_from(const std::string& s) {
    if (s == "l1") return CurtailNorm::L1;
    if (s == "l2") return CurtailNorm::L2;
    if (s == "linf") return CurtailNorm::Linf;
    return std::nullopt;
}

// ---- tool implementations --------------------------------------------------

inline ToolResult tool_load_network(ExecutionContext& ctx, const Json& args) {
    if (!args.contains("path") || !args["path"].is_string())
        return ToolResult::failure("missing path argument");
    const std::string path = args["path"].get<std::string>();
    if (!ctx.store.exists(path)) return ToolResult::failure("file not found: " + path);
    FeederNetwork net;
    try {
        net = feeder_from_json(Json::parse(ctx.store.read(path)));
    } catch (const Json::exception& e) {
        return ToolResult::failure("schema error: invalid JSON in " + path);
    } catch (const FeederSchemaError& e) {
        return ToolResult::failure(std::string("schema error: ") + e.what());
    }
    ctx.reset_for_network(net);
    return ToolResult::success("loaded: " + std::to_string(net.buses.size()) + " buses, " +
                               std::to_string(net.lines.size()) + " lines");
}

inline ToolResult tool_count_components(ExecutionContext& ctx, const Json& args) {
    if (auto err = require_network(ctx, args, false)) return *err;
    if (!args.contains("kind") || !args["kind"].is_string())
        return ToolResult::failure("missing kind argument");
    const std::string kind = lowercase(args["kind"].get<std::string>());
    const FeederNetwork& net = *ctx.active;
    size_t count = 0;
    if (kind == "bus") count = net.buses.size();
    else if (kind == "line") count = net.lines.size();
    else if (kind == "load") count = net.loads.size();
    else if (kind == "solar") count = net.solar.size();
    else if (kind == "capacitor") count = net.capacitors.size();
    else return ToolResult::failure("unknown component kind: " + kind);
    return ToolResult::success(kind + " count: " + std::to_string(count));
}

inline ToolResult tool_total_load(ExecutionContext& ctx, const Json& args) {
    if (auto err = require_network(ctx, args, false)) return *err;
    double p = 0.0, q = 0.0;
    for (const auto& [bus, pq] : ctx.active->loads) {
        p += pq.first;
        q += pq.second;
    }
    return ToolResult::success("total load: p=" + format_fixed6(p) + " pu, q=" +
                               format_fixed6(q) + " pu");
}

inline ToolResult tool_run_powerflow(ExecutionContext& ctx, const Json& args) {
    if (auto err = require_network(ctx, args, true)) return *err;
    try {
        ctx.solution = solve_power_flow(*ctx.active);
    } catch (const NonConvergence& e) {
        return ToolResult::failure(std::string("power flow did not converge: ") + e.what());
    }
    return ToolResult::success("power flow converged: " +
                               std::to_string(ctx.solution->iterations) + " iterations, max mismatch " +
                               format_fixed6(ctx.solution->max_mismatch) + " pu");
}

inline ToolResult tool_update_bus_voltages(ExecutionContext& ctx, const Json& args) {
    if (auto err = require_network(ctx, args, true)) return *err;
    if (!ctx.solution) return ToolResult::failure("no power-flow solution");
    ctx.commit_profile(*ctx.solution);
    double lo = 2.0, hi = 0.0;
    for (const auto& [bus, v] : ctx.profile) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return ToolResult::success("bus voltages updated: min " + format_fixed6(lo) + " pu, max " +
                               format_fixed6(hi) + " pu");
}

inline ToolResult tool_check_voltage_violations(ExecutionContext& ctx, const Json& args) {
    if (auto err = require_network(ctx, args, false)) return *err;
    if (!ctx.profile_simulated) return ToolResult::failure("no simulated voltages to check");
    const FeederNetwork& net = *ctx.active;
    std::string listing;
    for (const auto& [bus, v] : ctx.profile) { // std::map: ascending bus id
        if (v < net.vmin || v > net.vmax) {
            if (!listing.empty()) listing += ", ";
            listing += "bus " + std::to_string(bus) + " v=" + format_fixed6(v) +
                       (v < net.vmin ? " < vmin" : " > vmax");
        }
    }
    return ToolResult::success("violations: " + (listing.empty() ? "none" : listing));
}

inline ToolResult tool_run_dhc(ExecutionContext& ctx, const Json& args, CurtailNorm norm) {
    if (auto err = require_network(ctx, args, true)) return *err;
    if (ctx.active->solar.empty()) return ToolResult::failure("no solar buses in network");
    CurtailmentResult res;
    try {
        res = solve_curtailment(*ctx.active, norm);
    } catch (const DhcError& e) {
        return ToolResult::failure(e.what());
    } catch (const NonConvergence& e) {
        return ToolResult::failure(std::string("power flow did not converge: ") + e.what());
    }
    const std::string key = norm_name(norm);
    ctx.curtailments[key] = res;
    ctx.last_curtailment_norm = key;
    ctx.applied.erase("curtailment:" + key);
    return ToolResult::success("dhc " + key + ": objective " + format_fixed6(res.objective) +
                               " pu, feasible");
}

inline ToolResult tool_update_loads_curtailed(ExecutionContext& ctx, const Json& args,
                                              CurtailNorm norm) {
    if (auto err = require_network(ctx, args, true)) return *err;
    const std::string key = norm_name(norm);
    auto it = ctx.curtailments.find(key);
    if (it == ctx.curtailments.end())
        return ToolResult::failure("no curtailment result for " + key);
    if (ctx.applied.count("curtailment:" + key))
        return ToolResult::failure("curtailment already applied for " + key);

    FeederNetwork& net = *ctx.active;
    double total = 0.0;
    size_t touched = 0;
    for (const auto& [bus, c] : it->second.curtailed) {
        if (c <= 0.0) continue;
        net.solar[bus] = std::max(0.0, net.solar[bus] - c);
        total += c;
        ++touched;
    }
    try {
        ctx.solution = solve_power_flow(net);
    } catch (const NonConvergence& e) {
        return ToolResult::failure(std::string("power flow did not converge: ") + e.what());
    }
    ctx.commit_profile(*ctx.solution);
    ctx.applied.insert("curtailment:" + key);
    return ToolResult::success("curtailment applied (" + key + "): total " + format_fixed6(total) +
                               " pu over " + std::to_string(touched) + " buses");
}

inline ToolResult tool_top_curtailed_buses(ExecutionContext& ctx, const Json& args) {
    if (auto err = require_network(ctx, args, false)) return *err;
    if (ctx.last_curtailment_norm.empty()) return ToolResult::failure("no curtailment result");
    const CurtailmentResult& res = ctx.curtailments.at(ctx.last_curtailment_norm);
    BusSeries rows;
    for (const auto& [bus, c] : res.curtailed)
        if (c > 0.0) rows.push_back({bus, c});
    rank_series(rows);
    auto limit = parse_row_limit(args, rows);
    if (!limit) return ToolResult::failure("n must be a positive integer or \"all\"");
    rows.resize(*limit);
    return ToolResult::success("top curtailed buses: " + format_ranked(rows));
}

inline ToolResult tool_run_infeasibility(ExecutionContext& ctx, const Json& args, SlackNorm norm) {
    if (auto err = require_network(ctx, args, true)) return *err;
    InfeasibilityResult res;
    try {
        res = solve_infeasibility(*ctx.active, norm);
    } catch (const NonConvergence& e) {
        return ToolResult::failure(std::string("power flow did not converge: ") + e.what());
    } catch (const std::runtime_error& e) {
        return ToolResult::failure(e.what());
    }
    const std::string key = slack_norm_name(norm);
    ctx.infeasibilities[key] = res;
    ctx.last_infeasibility_norm = key;
    ctx.applied.erase("slack:" + key);
    return ToolResult::success("infeasibility " + key + ": objective " +
                               format_fixed6(res.objective) + " pu");
}

inline ToolResult tool_update_currents_infeasible(ExecutionContext& ctx, const Json& args,
                                                  SlackNorm norm) {
    if (auto err = require_network(ctx, args, true)) return *err;
    const std::string key = slack_norm_name(norm);
    auto it = ctx.infeasibilities.find(key);
    if (it == ctx.infeasibilities.end())
        return ToolResult::failure("no infeasibility result for " + key);
    if (ctx.applied.count("slack:" + key))
        return ToolResult::failure("slack currents already applied for " + key);

    FeederNetwork& net = *ctx.active;
    double total = 0.0;
    size_t touched = 0;
    for (const auto& [bus, s] : it->second.slack) {
        if (s == 0.0) continue;
        net.loads[bus].first -= s; // positive slack injects power
        total += std::fabs(s);
        ++touched;
    }
    try {
        ctx.solution = solve_power_flow(net);
    } catch (const NonConvergence& e) {
        return ToolResult::failure(std::string("power flow did not converge: ") + e.what());
    }
    ctx.commit_profile(*ctx.solution);
    ctx.applied.insert("slack:" + key);
    return ToolResult::success("slack currents applied (" + key + "): total " +
                               format_fixed6(total) + " pu over " + std::to_string(touched) +
                               " buses");
}

inline ToolResult tool_top_infeasible_buses(ExecutionContext& ctx, const Json& args) {
    if (auto err = require_network(ctx, args, false)) return *err;
    if (ctx.last_infeasibility_norm.empty()) return ToolResult::failure("no infeasibility result");
    const InfeasibilityResult& res = ctx.infeasibilities.at(ctx.last_infeasibility_norm);
    BusSeries rows;
    for (const auto& [bus, s] : res.slack)
        if (s != 0.0) rows.push_back({bus, std::fabs(s)});
    rank_series(rows);
    auto limit = parse_row_limit(args, rows);
    if (!limit) return ToolResult::failure("n must be a positive integer or \"all\"");
    rows.resize(*limit);
    return ToolResult::success("top infeasible buses: " + format_ranked(rows));
}

inline ToolResult tool_export_plot_data(ExecutionContext& ctx, const Json& args, size_t step_index) {
    if (auto err = require_network(ctx, args, false)) return *err;
    if (!args.contains("quantity") || !args["quantity"].is_string())
        return ToolResult::failure("missing quantity argument");
    const std::string quantity = lowercase(args["quantity"].get<std::string>());

    BusSeries rows;
    if (quantity == "voltages") {
        for (const auto& [bus, v] : ctx.profile) rows.push_back({bus, v});
    } else if (quantity == "curtailment") {
        if (ctx.last_curtailment_norm.empty())
            return ToolResult::failure("quantity missing: curtailment (run a DHC analysis first)");
        for (const auto& [bus, c] : ctx.curtailments.at(ctx.last_curtailment_norm).curtailed)
            rows.push_back({bus, c});
    } else if (quantity == "infeasible_currents") {
        if (ctx.last_infeasibility_norm.empty())
            return ToolResult::failure(
                "quantity missing: infeasible_currents (run an infeasibility analysis first)");
        for (const auto& [bus, s] : ctx.infeasibilities.at(ctx.last_infeasibility_norm).slack)
            rows.push_back({bus, std::fabs(s)});
    } else {
        return ToolResult::failure("unknown quantity: " + quantity);
    }

    const std::string stem = std::to_string(step_index) + "_" + quantity;
    ctx.pending_artifacts.push_back({quantity + ".csv", stem + ".csv", render_csv(rows)});
    ctx.pending_artifacts.push_back({quantity + ".svg", stem + ".svg",
                                     render_svg_bars(rows, quantity + " (" +
                                                     (ctx.active ? ctx.active->name : "") + ")")});
    return ToolResult::success("exported " + quantity + ": " + stem + ".csv, " + stem + ".svg");
}

// ---- registry assembly -----------------------------------------------------

inline ParamSpec network_param() {
    return {"network", ParamType::NetworkRef, true, {}};
}

// The shipped function pool. Step-indexed tools (export_plot_data) receive the
// step position through the executor; see executor.hpp.
inline Registry build_registry() {
    Registry reg;
    auto add = [&](std::string name, std::vector<ParamSpec> params, std::string description,
                   ToolCallable fn) {
        reg.add(ToolBinding{FunctionDescriptor{std::move(name), std::move(params),
                                               std::move(description)},
                            std::move(fn)});
    };

    add("load_network", {{"path", ParamType::String, true, {}}},
        "Load a feeder model file from the data store and make it the active network. "
        "Resets analysis state and the committed voltage profile.",
        tool_load_network);

    add("count_components",
        {{"kind", ParamType::Enum, true, {"bus", "line", "load", "solar", "capacitor"}}},
        "Count components of one kind (bus, line, load, solar, capacitor) in the active network.",
        tool_count_components);

    add("total_load", {},
        "Sum active and reactive load over all load entries of the active network.",
        tool_total_load);

    add("run_powerflow", {network_param()},
        "Solve steady-state power flow for the active network and store the solution. "
        "Does not modify the committed voltage profile; use update_bus_voltages for that.",
        tool_run_powerflow);

    add("update_bus_voltages", {network_param()},
        "Commit the latest power-flow solution into the network's bus voltage profile "
        "so inspection and plotting tools see simulated voltages.",
        tool_update_bus_voltages);

    add("check_voltage_violations", {},
        "List buses whose committed voltage profile violates the vmin/vmax band; "
        "requires simulated voltages.",
        tool_check_voltage_violations);

    struct NormEntry { CurtailNorm norm; const char* tag; const char* flavor; };
    const NormEntry norms[] = {
        {CurtailNorm::L1, "l1", "sparse (few systems curtailed)"},
        {CurtailNorm::L2, "l2", "balanced (least-squares spread)"},
        {CurtailNorm::Linf, "linf", "equitable (equal curtailment level)"},
    };
    for (const auto& entry : norms) {
        const CurtailNorm norm = entry.norm;
        add(std::string("run_dhc_") + entry.tag, {network_param()},
            std::string("Dynamic hosting capacity: compute the minimal ") + entry.tag +
                "-norm solar curtailment keeping voltages at or under vmax; " + entry.flavor + ".",
            [norm](ExecutionContext& ctx, const Json& args) { return tool_run_dhc(ctx, args, norm); });
        add(std::string("update_loads_curtailed_power_") + entry.tag, {network_param()},
            std::string("Apply the stored ") + entry.tag +
                "-norm curtailment to the solar injections, re-solve power flow, and refresh "
                "the committed voltage profile.",
            [norm](ExecutionContext& ctx, const Json& args) {
                return tool_update_loads_curtailed(ctx, args, norm);
            });
    }

    add("top_curtailed_buses", {{"n", ParamType::String, true, {}}},
        "Rank buses by curtailed power from the most recent DHC run, largest first; "
        "n is a positive integer or \"all\".",
        tool_top_curtailed_buses);

    struct SlackEntry { SlackNorm norm; const char* tag; const char* flavor; };
    const SlackEntry slacks[] = {
        {SlackNorm::L1, "l1", "sparse corrective injections"},
        {SlackNorm::L2, "l2", "least-squares corrective injections"},
    };
    for (const auto& entry : slacks) {
        const SlackNorm norm = entry.norm;
        add(std::string("run_infeasibility_") + entry.tag, {network_param()},
            std::string("Current infeasibility analysis: minimal ") + entry.tag +
                "-norm slack injections restoring the voltage band; " + entry.flavor + ".",
            [norm](ExecutionContext& ctx, const Json& args) {
                return tool_run_infeasibility(ctx, args, norm);
            });
        add(std::string("update_currents_infeasible_") + entry.tag, {network_param()},
            std::string("Apply the stored ") + entry.tag +
                "-norm slack injections to the network, re-solve power flow, and refresh "
                "the committed voltage profile.",
            [norm](ExecutionContext& ctx, const Json& args) {
                return tool_update_currents_infeasible(ctx, args, norm);
            });
    }

    add("top_infeasible_buses", {{"n", ParamType::String, true, {}}},
        "Rank buses by slack current magnitude from the most recent infeasibility run, "
        "largest first; n is a positive integer or \"all\".",
        tool_top_infeasible_buses);

    add("export_plot_data",
        {{"quantity", ParamType::Enum, true, {"voltages", "curtailment", "infeasible_currents"}}},
        "Write CSV plot data and an SVG chart for voltages, curtailment, or infeasible "
        "currents into the run's artifact directory.",
        [](ExecutionContext& ctx, const Json& args) {
            return tool_export_plot_data(ctx, args, ctx.current_step);
        });

    return reg;
}

} // namespace gridtools
} // namespace gridagent
