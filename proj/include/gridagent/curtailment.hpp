#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridagent/feeder.hpp"
#include "gridagent/sensitivity.hpp"
#include "gridagent/solvers.hpp"

namespace gridagent {

enum class CurtailNorm { L1, L2, Linf };

inline std::string norm_name(CurtailNorm n) {
    switch (n) {
        case CurtailNorm::L1: return "l1";
        case CurtailNorm::L2: return "l2";
        case CurtailNorm::Linf: return "linf";
    }
    return "l1";
}

struct CurtailmentResult {
    std::map<int, double> curtailed; // bus -> c_i, every solar bus present
    CurtailNorm norm = CurtailNorm::L1;
    double objective = 0.0;          // the minimized norm of c
    bool feasible = true;
};

struct DhcError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The overvoltage constraints shared by all three norms, in the linearized
// model: sensitivity * c >= needed, 0 <= c <= rating.
struct DhcProblem {
    std::vector<int> solar_buses;
    std::vector<double> rating;
    std::vector<double> needed; // v0_i - vmax per constrained bus, may be <= 0
    Mat sens;                   // rows follow VoltageModel::buses
};

inline DhcProblem build_dhc_problem(const FeederNetwork& net) {
    DhcProblem prob;
    for (const auto& [bus, rated] : net.solar) {
        prob.solar_buses.push_back(bus);
        prob.rating.push_back(rated);
    }
    if (prob.solar_buses.empty()) throw DhcError("no solar buses in network");
    VoltageModel model = build_voltage_model(net, prob.solar_buses);
    prob.sens = model.sensitivity;
    prob.needed.resize(model.buses.size());
    for (size_t i = 0; i < model.buses.size(); ++i)
        prob.needed[i] = model.v0.at(model.buses[i]) - net.vmax;
    return prob;
}

namespace detail {

inline bool dhc_feasible_at(const DhcProblem& p, const std::vector<double>& c, double slack = 1e-12) {
    for (size_t i = 0; i < p.needed.size(); ++i) {
        double reduction = 0.0;
        for (size_t j = 0; j < c.size(); ++j) reduction += p.sens(i, j) * c[j];
        if (reduction + slack < p.needed[i]) return false;
    }
    return true;
}

inline std::vector<double> uniform_level(const DhcProblem& p, double t) {
    std::vector<double> c(p.rating.size());
    for (size_t j = 0; j < c.size(); ++j) c[j] = std::min(t, p.rating[j]);
    return c;
}

inline std::vector<double> solve_dhc_linf(const DhcProblem& p) {
    double hi = 0.0;
    for (double r : p.rating) hi = std::max(hi, r);
    if (!dhc_feasible_at(p, uniform_level(p, hi)))
        throw DhcError("infeasible: full curtailment still violates voltage limits");
    double lo = 0.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dhc_feasible_at(p, uniform_level(p, mid))) hi = mid;
        else lo = mid;
    }
    return uniform_level(p, hi);
}

inline std::vector<double> solve_dhc_l2(const DhcProblem& p) {
    const size_t n = p.rating.size();
    const size_t m = p.needed.size();
    // G c >= h: voltage rows, then c >= 0, then -c >= -rating.
    Mat G(m + 2 * n, n);
    std::vector<double> h(m + 2 * n, 0.0);
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) G(i, j) = p.sens(i, j);
        h[i] = p.needed[i];
    }
    for (size_t j = 0; j < n; ++j) {
        G(m + j, j) = 1.0;
        h[m + j] = 0.0;
        G(m + n + j, j) = -1.0;
        h[m + n + j] = -p.rating[j];
    }
    LdpResult r = solve_ldp(G, h);
    if (!r.feasible) throw DhcError("infeasible: full curtailment still violates voltage limits");
    for (double& v : r.x) v = std::max(0.0, v);
    return r.x;
}

inline std::vector<double> solve_dhc_l1(const DhcProblem& p) {
    const size_t n = p.rating.size();
    // Keep only binding voltage rows; nonnegative c cannot violate the rest.
    std::vector<size_t> rows;
    for (size_t i = 0; i < p.needed.size(); ++i)
        if (p.needed[i] > 0.0) rows.push_back(i);
    const size_t m = rows.size();

    // Standard form over [c, surplus, upper-bound slack].
    Mat A(m + n, n + m + n);
    std::vector<double> b(m + n, 0.0);
    std::vector<double> cost(n + m + n, 0.0);
    for (size_t j = 0; j < n; ++j) cost[j] = 1.0;
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < n; ++j) A(i, j) = p.sens(rows[i], j);
        A(i, n + i) = -1.0;
        b[i] = p.needed[rows[i]];
    }
    for (size_t j = 0; j < n; ++j) {
        A(m + j, j) = 1.0;
        A(m + j, n + m + j) = 1.0;
        b[m + j] = p.rating[j];
    }
    LpResult r = SimplexSolver::solve(A, b, cost);
    if (!r.feasible) throw DhcError("infeasible: full curtailment still violates voltage limits");
    std::vector<double> c(r.x.begin(), r.x.begin() + static_cast<long>(n));
    for (double& v : c) v = std::max(0.0, v);
    return c;
}

} // namespace detail

// Minimal-norm curtailment keeping linearized voltages at or under vmax.
inline CurtailmentResult solve_curtailment(const FeederNetwork& net, CurtailNorm norm) {
    const DhcProblem prob = build_dhc_problem(net);
    CurtailmentResult result;
    result.norm = norm;

    std::vector<double> c(prob.rating.size(), 0.0);
    const bool already_ok = detail::dhc_feasible_at(prob, c);
    if (!already_ok) {
        switch (norm) {
            case CurtailNorm::Linf: c = detail::solve_dhc_linf(prob); break;
            case CurtailNorm::L2: c = detail::solve_dhc_l2(prob); break;
            case CurtailNorm::L1: c = detail::solve_dhc_l1(prob); break;
        }
    }
    double l1 = 0.0, l2 = 0.0, linf = 0.0;
    for (size_t j = 0; j < c.size(); ++j) {
        result.curtailed[prob.solar_buses[j]] = c[j];
        l1 += c[j];
        l2 += c[j] * c[j];
        linf = std::max(linf, c[j]);
    }
    switch (norm) {
        case CurtailNorm::L1: result.objective = l1; break;
        case CurtailNorm::L2: result.objective = std::sqrt(l2); break;
        case CurtailNorm::Linf: result.objective = linf; break;
    }
    return result;
}

} // namespace gridagent
