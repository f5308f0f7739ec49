#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "gridagent/feeder.hpp"

namespace gridagent {

struct PowerFlowSolution {
    std::map<int, double> voltage;    // bus -> |V| pu
    int iterations = 0;
    double max_mismatch = 0.0;        // max complex power mismatch, pu
};

struct NonConvergence : std::runtime_error {
    int iterations;
    double mismatch;
    NonConvergence(int it, double mm)
        : std::runtime_error("power flow did not converge after " + std::to_string(it) +
                             " iterations (mismatch " + std::to_string(mm) + " pu)"),
          iterations(it), mismatch(mm) {}
};

constexpr double kPowerFlowTolerance = 1e-8;
constexpr int kPowerFlowMaxIterations = 100;

// Backward-forward sweep on the radial tree. Backward pass accumulates branch
// currents from injection currents at the previous voltage estimate; forward
// pass propagates voltage drops from the source. Converged when the largest
// complex-power mismatch |S_spec - V * conj(I_inj)| falls under tolerance.
inline PowerFlowSolution solve_power_flow(const FeederNetwork& net,
                                          double tolerance = kPowerFlowTolerance,
                                          int max_iterations = kPowerFlowMaxIterations) {
    using cx = std::complex<double>;
    const FeederTree tree = build_tree(net);

    std::map<int, cx> voltage;
    std::map<int, cx> consumption;
    for (const auto& b : net.buses) {
        voltage[b.id] = cx(1.0, 0.0);
        auto [p, q] = net.net_consumption(b.id);
        consumption[b.id] = cx(p, q);
    }

    double mismatch = 0.0;
    for (int iter = 1; iter <= max_iterations; ++iter) {
        // Injection current drawn at each bus, at the current voltage estimate.
        std::map<int, cx> inj;
        bool blown = false;
        for (const auto& b : net.buses) {
            const cx v = voltage[b.id];
            if (std::abs(v) < 1e-9) { blown = true; break; }
            inj[b.id] = std::conj(consumption[b.id] / v);
        }
        if (blown) throw NonConvergence(iter, std::numeric_limits<double>::infinity());

        // Backward: branch current into each bus equals its own draw plus all
        // descendant branch currents (walk BFS order in reverse).
        std::map<int, cx> branch_current;
        for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
            cx total = inj[*it];
            if (auto kids = tree.kids.find(*it); kids != tree.kids.end())
                for (int child : kids->second) total += branch_current[child];
            branch_current[*it] = total;
        }

        // Forward: drop each branch impedance from the parent voltage.
        voltage[tree.source] = cx(1.0, 0.0);
        for (int bus : tree.order) {
            if (bus == tree.source) continue;
            auto [r, x] = tree.branch.at(bus);
            voltage[bus] = voltage[tree.parent.at(bus)] - cx(r, x) * branch_current[bus];
        }

        mismatch = 0.0;
        for (const auto& b : net.buses) {
            if (b.id == tree.source) continue;
            const cx implied = voltage[b.id] * std::conj(inj[b.id]);
            mismatch = std::max(mismatch, std::abs(consumption[b.id] - implied));
        }
        if (mismatch < tolerance) {
            PowerFlowSolution sol;
            sol.iterations = iter;
            sol.max_mismatch = mismatch;
            for (const auto& [id, v] : voltage)
                sol.voltage[id] = (id == tree.source) ? 1.0 : std::abs(v);
            return sol;
        }
        if (!std::isfinite(mismatch)) break;
    }
    throw NonConvergence(max_iterations, mismatch);
}

} // namespace gridagent
