#pragma once

#include <map>
#include <vector>

#include "gridagent/feeder.hpp"
#include "gridagent/powerflow.hpp"
#include "gridagent/solvers.hpp"

namespace gridagent {

// First-order voltage response to active-power injections, linearized at the
// network's present operating point. Rows follow `buses`, columns follow
// `injection_buses`, both in ascending bus-id order.
//
// Entries are central-difference tangents of the nonlinear solve rather than
// bare common-path resistances: the resistance coefficients overstate the
// marginal voltage change by a factor of one plus the local drop, which is
// enough to leave residual limit violations after an optimized curtailment.
// The tangent keeps the linear model on the conservative side of the true
// concave voltage response.
struct VoltageModel {
    std::vector<int> buses;           // constrained buses, source excluded
    std::vector<int> injection_buses; // columns
    std::map<int, double> v0;         // operating-point voltages, all buses
    Mat sensitivity;                  // d|V_i| / dP_inj_j, pu per pu
};

inline VoltageModel build_voltage_model(const FeederNetwork& net,
                                        const std::vector<int>& injection_buses) {
    VoltageModel model;
    model.injection_buses = injection_buses;

    const PowerFlowSolution base = solve_power_flow(net);
    model.v0 = base.voltage;

    const int source = net.source_id();
    for (const auto& b : net.buses)
        if (b.id != source) model.buses.push_back(b.id);
    std::sort(model.buses.begin(), model.buses.end());

    model.sensitivity = Mat(model.buses.size(), injection_buses.size());
    const double eps = 1e-5;
    const double fd_tol = 1e-12;
    for (size_t j = 0; j < injection_buses.size(); ++j) {
        FeederNetwork plus = net, minus = net;
        plus.loads[injection_buses[j]].first -= eps;   // +eps injection
        minus.loads[injection_buses[j]].first += eps;  // -eps injection
        const PowerFlowSolution up = solve_power_flow(plus, fd_tol, 200);
        const PowerFlowSolution down = solve_power_flow(minus, fd_tol, 200);
        for (size_t i = 0; i < model.buses.size(); ++i) {
            const int bus = model.buses[i];
            model.sensitivity(i, j) = (up.voltage.at(bus) - down.voltage.at(bus)) / (2.0 * eps);
        }
    }
    return model;
}

} // namespace gridagent
