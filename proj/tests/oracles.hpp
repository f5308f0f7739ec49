// Test-only reference implementations, kept independent of the library's
// solver paths: a rectangular Newton power flow with its own elimination, the
// closed-form two-bus solve, brute-force searches for the optimization
// routines, and a random feeder generator.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "gridagent/curtailment.hpp"
#include "gridagent/feeder.hpp"
#include "gridagent/infeasibility.hpp"

namespace oracles {

using gridagent::FeederNetwork;

// |V2| for a single line (r, x) feeding load (p, q) from a 1.0 pu source:
// the positive root of v^4 + v^2 (2(pr+qx) - 1) + (p^2+q^2)(r^2+x^2) = 0.
inline double two_bus_voltage(double r, double x, double p, double q) {
    const double b = 2.0 * (p * r + q * x) - 1.0;
    const double c = (p * p + q * q) * (r * r + x * x);
    const double disc = b * b - 4.0 * c;
    if (disc < 0.0) throw std::runtime_error("two-bus case has no real solution");
    const double v2 = (-b + std::sqrt(disc)) / 2.0;
    return std::sqrt(v2);
}

namespace detail {

// Plain Gaussian elimination, local to the oracle.
inline std::vector<double> gauss(std::vector<std::vector<double>> m, std::vector<double> rhs) {
    const size_t n = rhs.size();
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
        std::swap(m[col], m[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        if (std::fabs(m[col][col]) < 1e-14) throw std::runtime_error("oracle: singular jacobian");
        for (size_t r = col + 1; r < n; ++r) {
            const double f = m[r][col] / m[col][col];
            for (size_t j = col; j < n; ++j) m[r][j] -= f * m[col][j];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (size_t j = i + 1; j < n; ++j) s -= m[i][j] * x[j];
        x[i] = s / m[i][i];
    }
    return x;
}

} // namespace detail

// Newton-Raphson on the exact nonlinear bus power balance in rectangular
// coordinates, with a finite-difference Jacobian. Shares nothing with the
// sweep solver.
inline std::map<int, double> newton_power_flow(const FeederNetwork& net, double tol = 1e-10,
                                               int max_iter = 60) {
    using cx = std::complex<double>;
    std::vector<int> ids;
    for (const auto& b : net.buses) ids.push_back(b.id);
    std::sort(ids.begin(), ids.end());
    const int source = net.source_id();
    std::map<int, size_t> pos;
    for (size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = i;

    const size_t nb = ids.size();
    std::vector<std::vector<cx>> Y(nb, std::vector<cx>(nb, cx(0, 0)));
    for (const auto& l : net.lines) {
        const cx y = 1.0 / cx(l.r, l.x);
        const size_t a = pos[l.from], b = pos[l.to];
        Y[a][a] += y;
        Y[b][b] += y;
        Y[a][b] -= y;
        Y[b][a] -= y;
    }

    std::vector<size_t> unknown; // indices of non-source buses
    for (size_t i = 0; i < nb; ++i)
        if (ids[i] != source) unknown.push_back(i);
    const size_t n = 2 * unknown.size();

    std::vector<cx> S(nb);
    for (size_t i = 0; i < nb; ++i) {
        auto [p, q] = net.net_consumption(ids[i]);
        S[i] = cx(p, q);
    }

    std::vector<double> state(n, 0.0); // (e, f) per unknown bus
    for (size_t k = 0; k < unknown.size(); ++k) state[2 * k] = 1.0;

    auto residual = [&](const std::vector<double>& st) {
        std::vector<cx> V(nb, cx(1.0, 0.0));
        for (size_t k = 0; k < unknown.size(); ++k)
            V[unknown[k]] = cx(st[2 * k], st[2 * k + 1]);
        std::vector<double> F(n, 0.0);
        for (size_t k = 0; k < unknown.size(); ++k) {
            const size_t i = unknown[k];
            cx inj(0, 0);
            for (size_t j = 0; j < nb; ++j) inj += Y[i][j] * V[j];
            const cx mism = S[i] + V[i] * std::conj(inj); // consumption positive
            F[2 * k] = mism.real();
            F[2 * k + 1] = mism.imag();
        }
        return F;
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        std::vector<double> F = residual(state);
        double worst = 0.0;
        for (double v : F) worst = std::max(worst, std::fabs(v));
        if (worst < tol) break;
        const double h = 1e-7;
        std::vector<std::vector<double>> J(n, std::vector<double>(n, 0.0));
        for (size_t col = 0; col < n; ++col) {
            std::vector<double> bumped = state;
            bumped[col] += h;
            std::vector<double> Fb = residual(bumped);
            for (size_t row = 0; row < n; ++row) J[row][col] = (Fb[row] - F[row]) / h;
        }
        for (double& v : F) v = -v;
        std::vector<double> delta = detail::gauss(J, F);
        for (size_t i = 0; i < n; ++i) state[i] += delta[i];
    }

    std::vector<double> F = residual(state);
    for (double v : F)
        if (std::fabs(v) > 1e-6) throw std::runtime_error("oracle newton did not converge");

    std::map<int, double> out;
    out[source] = 1.0;
    for (size_t k = 0; k < unknown.size(); ++k)
        out[ids[unknown[k]]] = std::abs(cx(state[2 * k], state[2 * k + 1]));
    return out;
}

// Random radial feeder with bounded loads; convergent by construction.
inline FeederNetwork random_feeder(std::mt19937& rng, int n_buses) {
    using gridagent::Bus;
    using gridagent::BusType;
    using gridagent::Line;
    FeederNetwork net;
    net.name = "random";
    for (int i = 0; i < n_buses; ++i)
        net.buses.push_back({i, i == 0 ? BusType::Source : BusType::Load});
    std::uniform_real_distribution<double> r_dist(0.005, 0.05);
    std::uniform_real_distribution<double> ratio(1.5, 2.5);
    std::uniform_real_distribution<double> p_dist(0.002, 0.03);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int b = 1; b < n_buses; ++b) {
        std::uniform_int_distribution<int> parent(0, b - 1);
        Line l;
        l.from = parent(rng);
        l.to = b;
        l.r = r_dist(rng);
        l.x = l.r * ratio(rng);
        net.lines.push_back(l);
        if (unit(rng) < 0.8) net.loads[b] = {p_dist(rng), p_dist(rng) * 0.4};
        if (unit(rng) < 0.3) net.solar[b] = p_dist(rng) * 2.0;
        if (unit(rng) < 0.15) net.capacitors[b] = p_dist(rng) * 0.5;
    }
    return net;
}

// ---- optimization oracles (search the same linearized problem) -------------

// Minimal uniform curtailment level by fine bisection.
inline std::vector<double> linf_bisection(const gridagent::DhcProblem& p) {
    auto feasible = [&](double t) {
        for (size_t i = 0; i < p.needed.size(); ++i) {
            double red = 0.0;
            for (size_t j = 0; j < p.rating.size(); ++j)
                red += p.sens(i, j) * std::min(t, p.rating[j]);
            if (red + 1e-12 < p.needed[i]) return false;
        }
        return true;
    };
    double hi = 0.0;
    for (double r : p.rating) hi = std::max(hi, r);
    if (!feasible(hi)) throw std::runtime_error("oracle: linf infeasible");
    double lo = 0.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    std::vector<double> c(p.rating.size());
    for (size_t j = 0; j < c.size(); ++j) c[j] = std::min(hi, p.rating[j]);
    return c;
}

// Exhaustive 0.001-pu lattice search minimizing the l1 norm (three variables).
inline double l1_lattice_objective(const gridagent::DhcProblem& p, double step = 0.001) {
    if (p.rating.size() != 3) throw std::runtime_error("oracle lattice expects 3 solar buses");
    auto feasible = [&](double c0, double c1, double c2) {
        for (size_t i = 0; i < p.needed.size(); ++i) {
            const double red = p.sens(i, 0) * c0 + p.sens(i, 1) * c1 + p.sens(i, 2) * c2;
            if (red + 1e-12 < p.needed[i]) return false;
        }
        return true;
    };
    double best = std::numeric_limits<double>::infinity();
    const long n0 = std::lround(p.rating[0] / step);
    const long n1 = std::lround(p.rating[1] / step);
    const long n2 = std::lround(p.rating[2] / step);
    for (long a = 0; a <= n0; ++a) {
        const double c0 = a * step;
        if (c0 >= best) break; // objective only grows from here
        for (long b = 0; b <= n1; ++b) {
            const double c1 = b * step;
            if (c0 + c1 >= best) break;
            for (long c = 0; c <= n2; ++c) {
                const double c2 = c * step;
                const double obj = c0 + c1 + c2;
                if (obj >= best) break;
                if (feasible(c0, c1, c2)) {
                    best = obj;
                    break; // larger c2 only raises the objective
                }
            }
        }
    }
    return best;
}

// Least-squares slack via enumeration over active constraint subsets:
// minimize ||s||^2 with G s >= h by KKT (s = G_A' lambda, lambda >= 0) over
// every subset of up to `max_active` constraints.
inline std::vector<double> l2_active_set_enumeration(const std::vector<std::vector<double>>& G,
                                                     const std::vector<double>& h,
                                                     size_t max_active = 3) {
    const size_t m = G.size();
    const size_t n = G.empty() ? 0 : G[0].size();
    auto violates = [&](const std::vector<double>& s) {
        for (size_t i = 0; i < m; ++i) {
            double lhs = 0.0;
            for (size_t j = 0; j < n; ++j) lhs += G[i][j] * s[j];
            if (lhs + 1e-9 < h[i]) return true;
        }
        return false;
    };

    std::vector<double> best;
    double best_norm = std::numeric_limits<double>::infinity();
    std::vector<size_t> subset;
    auto consider = [&]() {
        const size_t k = subset.size();
        std::vector<double> s(n, 0.0);
        if (k > 0) {
            std::vector<std::vector<double>> gram(k, std::vector<double>(k, 0.0));
            std::vector<double> rhs(k, 0.0);
            for (size_t a = 0; a < k; ++a) {
                for (size_t b = 0; b < k; ++b)
                    for (size_t j = 0; j < n; ++j) gram[a][b] += G[subset[a]][j] * G[subset[b]][j];
                rhs[a] = h[subset[a]];
            }
            std::vector<double> lambda;
            try {
                lambda = detail::gauss(gram, rhs);
            } catch (const std::runtime_error&) {
                return;
            }
            for (double l : lambda)
                if (l < -1e-9) return; // KKT sign condition
            for (size_t a = 0; a < k; ++a)
                for (size_t j = 0; j < n; ++j) s[j] += lambda[a] * G[subset[a]][j];
        }
        if (violates(s)) return;
        double norm = 0.0;
        for (double v : s) norm += v * v;
        if (norm < best_norm) {
            best_norm = norm;
            best = s;
        }
    };
    // enumerate subsets of size 0..max_active
    std::function<void(size_t)> recurse = [&](size_t start) {
        consider();
        if (subset.size() == max_active) return;
        for (size_t i = start; i < m; ++i) {
            subset.push_back(i);
            recurse(i + 1);
            subset.pop_back();
        }
    };
    recurse(0);
    if (best.empty() && n > 0 && !violates(std::vector<double>(n, 0.0)))
        best.assign(n, 0.0);
    if (best.empty()) throw std::runtime_error("oracle: no KKT point found");
    return best;
}

} // namespace oracles
