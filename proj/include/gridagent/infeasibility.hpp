#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridagent/feeder.hpp"
#include "gridagent/sensitivity.hpp"
#include "gridagent/solvers.hpp"

namespace gridagent {

enum class SlackNorm { L1, L2 };

inline std::string slack_norm_name(SlackNorm n) { return n == SlackNorm::L1 ? "l1" : "l2"; }

// Sign-free corrective power injections restoring vmin <= v <= vmax in the
// linearized model. `slack` keeps the signed values used when the correction
// is applied to the network; magnitudes are what exit strings and rankings
// report.
struct InfeasibilityResult {
    std::map<int, double> slack; // bus -> signed injection, every non-source bus present
    SlackNorm norm = SlackNorm::L1;
    double objective = 0.0;

    double magnitude(int bus) const { return std::fabs(slack.at(bus)); }
};

// Two-sided voltage-band constraints on slack injections s:
//   W s >= vmin - v0   and   -W s >= v0 - vmax.
struct SlackProblem {
    std::vector<int> slack_buses;
    std::vector<double> raise; // vmin - v0_i
    std::vector<double> lower; // v0_i - vmax
    Mat sens;
};

inline SlackProblem build_slack_problem(const FeederNetwork& net) {
    SlackProblem prob;
    const int source = net.source_id();
    for (const auto& b : net.buses)
        if (b.id != source) prob.slack_buses.push_back(b.id);
    std::sort(prob.slack_buses.begin(), prob.slack_buses.end());

    VoltageModel model = build_voltage_model(net, prob.slack_buses);
    prob.sens = model.sensitivity;
    prob.raise.resize(model.buses.size());
    prob.lower.resize(model.buses.size());
    for (size_t i = 0; i < model.buses.size(); ++i) {
        const double v0 = model.v0.at(model.buses[i]);
        prob.raise[i] = net.vmin - v0;
        prob.lower[i] = v0 - net.vmax;
    }
    return prob;
}

namespace detail {

inline bool slack_free_feasible(const SlackProblem& p, double slack = 1e-12) {
    for (size_t i = 0; i < p.raise.size(); ++i)
        if (p.raise[i] > slack || p.lower[i] > slack) return false;
    return true;
}

inline std::vector<double> solve_slack_l2(const SlackProblem& p) {
    const size_t n = p.slack_buses.size();
    const size_t m = p.raise.size();
    Mat G(2 * m, n);
    std::vector<double> h(2 * m, 0.0);
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
            G(i, j) = p.sens(i, j);
            G(m + i, j) = -p.sens(i, j);
        }
        h[i] = p.raise[i];
        h[m + i] = p.lower[i];
    }
    LdpResult r = solve_ldp(G, h);
    if (!r.feasible)
        throw std::runtime_error("slack least-squares constraints are incompatible");
    return r.x;
}

inline std::vector<double> solve_slack_l1(const SlackProblem& p) {
    const size_t n = p.slack_buses.size();
    const size_t m = p.raise.size();
    // s = pos - neg; min sum(pos + neg). Rows carry explicit surplus columns
    // because signed slacks can push either constraint side.
    const size_t vars = 2 * n + 2 * m;
    Mat A(2 * m, vars);
    std::vector<double> b(2 * m, 0.0);
    std::vector<double> cost(vars, 0.0);
    for (size_t j = 0; j < 2 * n; ++j) cost[j] = 1.0;
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) {
            A(i, j) = p.sens(i, j);
            A(i, n + j) = -p.sens(i, j);
            A(m + i, j) = -p.sens(i, j);
            A(m + i, n + j) = p.sens(i, j);
        }
        A(i, 2 * n + i) = -1.0;
        A(m + i, 2 * n + m + i) = -1.0;
        b[i] = p.raise[i];
        b[m + i] = p.lower[i];
    }
    LpResult r = SimplexSolver::solve(A, b, cost);
    if (!r.feasible)
        throw std::runtime_error("slack linear program is infeasible");
    std::vector<double> s(n, 0.0);
    for (size_t j = 0; j < n; ++j) s[j] = r.x[j] - r.x[n + j];
    return s;
}

} // namespace detail

// Minimal-norm slack injections; zero everywhere when the network already
// meets its voltage band.
inline InfeasibilityResult solve_infeasibility(const FeederNetwork& net, SlackNorm norm) {
    const SlackProblem prob = build_slack_problem(net);
    InfeasibilityResult result;
    result.norm = norm;

    std::vector<double> s(prob.slack_buses.size(), 0.0);
    if (!detail::slack_free_feasible(prob))
        s = (norm == SlackNorm::L2) ? detail::solve_slack_l2(prob) : detail::solve_slack_l1(prob);

    double l1 = 0.0, l2 = 0.0;
    for (size_t j = 0; j < s.size(); ++j) {
        result.slack[prob.slack_buses[j]] = s[j];
        l1 += std::fabs(s[j]);
        l2 += s[j] * s[j];
    }
    result.objective = (norm == SlackNorm::L1) ? l1 : std::sqrt(l2);
    return result;
}

} // namespace gridagent
