#include "catch_amalgamated.hpp"

#include <fstream>

#include "gridagent/curtailment.hpp"
#include "gridagent/infeasibility.hpp"
#include "gridagent/powerflow.hpp"
#include "gridagent/solvers.hpp"
#include "oracles.hpp"

using namespace gridagent;

namespace {

FeederNetwork load_fixture(const std::string& name) {
    std::ifstream in(std::string(GA_DATA_DIR) + "/" + name);
    REQUIRE(in);
    return feeder_from_json(Json::parse(in));
}

// Heavy loads, no solar: several buses sag under vmin.
FeederNetwork undervoltage_fixture() {
    FeederNetwork net;
    net.name = "undervolt";
    net.vmin = 0.97;
    net.vmax = 1.05;
    net.buses = {{0, BusType::Source}, {1, BusType::Load}, {2, BusType::Load},
                 {3, BusType::Load}, {4, BusType::Load}};
    net.lines = {{0, 1, 0.05, 0.10}, {1, 2, 0.06, 0.12}, {2, 3, 0.07, 0.13}, {1, 4, 0.05, 0.09}};
    net.loads[1] = {0.05, 0.02};
    net.loads[2] = {0.08, 0.03};
    net.loads[3] = {0.10, 0.04};
    net.loads[4] = {0.06, 0.02};
    return net;
}

std::vector<std::vector<double>> slack_constraint_rows(const SlackProblem& p) {
    std::vector<std::vector<double>> G;
    const size_t n = p.slack_buses.size();
    for (size_t i = 0; i < p.raise.size(); ++i) {
        std::vector<double> row(n);
        for (size_t j = 0; j < n; ++j) row[j] = p.sens(i, j);
        G.push_back(row);
    }
    for (size_t i = 0; i < p.lower.size(); ++i) {
        std::vector<double> row(n);
        for (size_t j = 0; j < n; ++j) row[j] = -p.sens(i, j);
        G.push_back(row);
    }
    return G;
}

} // namespace

TEST_CASE("dense solve handles a known 3x3 system") {
    Mat m(3, 3);
    m(0, 0) = 2; m(0, 1) = 1; m(0, 2) = -1;
    m(1, 0) = -3; m(1, 1) = -1; m(1, 2) = 2;
    m(2, 0) = -2; m(2, 1) = 1; m(2, 2) = 2;
    auto x = solve_dense(m, {8, -11, -3});
    CHECK(x[0] == Catch::Approx(2.0).margin(1e-10));
    CHECK(x[1] == Catch::Approx(3.0).margin(1e-10));
    CHECK(x[2] == Catch::Approx(-1.0).margin(1e-10));

    Mat singular(2, 2);
    singular(0, 0) = 1; singular(0, 1) = 2;
    singular(1, 0) = 2; singular(1, 1) = 4;
    CHECK_THROWS_AS(solve_dense(singular, {1, 2}), SingularMatrix);
}

TEST_CASE("nnls clamps negatives and keeps exact fits") {
    // unconstrained optimum has a negative coordinate; NNLS must clamp it
    Mat A(3, 2);
    A(0, 0) = 1; A(0, 1) = 0;
    A(1, 0) = 0; A(1, 1) = 1;
    A(2, 0) = 1; A(2, 1) = 1;
    auto x = solve_nnls(A, {-1.0, 2.0, 1.0});
    CHECK(x[0] == Catch::Approx(0.0).margin(1e-9));
    CHECK(x[1] == Catch::Approx(1.5).margin(1e-9));

    auto exact = solve_nnls(A, {1.0, 2.0, 3.0});
    CHECK(exact[0] == Catch::Approx(1.0).margin(1e-9));
    CHECK(exact[1] == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("simplex solves a textbook LP") {
    // min -3x - 5y st x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), obj -36
    Mat A(3, 5);
    A(0, 0) = 1; A(0, 2) = 1;
    A(1, 1) = 2; A(1, 3) = 1;
    A(2, 0) = 3; A(2, 1) = 2; A(2, 4) = 1;
    LpResult r = SimplexSolver::solve(A, {4, 12, 18}, {-3, -5, 0, 0, 0});
    REQUIRE(r.feasible);
    CHECK(r.objective == Catch::Approx(-36.0).margin(1e-9));
    CHECK(r.x[0] == Catch::Approx(2.0).margin(1e-9));
    CHECK(r.x[1] == Catch::Approx(6.0).margin(1e-9));

    // infeasible: x = -1 with x >= 0 in standard form
    Mat B(1, 1);
    B(0, 0) = 1;
    CHECK_FALSE(SimplexSolver::solve(B, {-1}, {1}).feasible);
}

TEST_CASE("a network without overvoltage curtails nothing") {
    FeederNetwork net = load_fixture("grand_isle.json");
    for (auto norm : {CurtailNorm::L1, CurtailNorm::L2, CurtailNorm::Linf}) {
        CurtailmentResult res = solve_curtailment(net, norm);
        CHECK(res.objective == 0.0);
        for (const auto& [bus, c] : res.curtailed) CHECK(c == 0.0);
    }
}

TEST_CASE("linf curtailment is a uniform level and matches the bisection oracle") {
    FeederNetwork net = load_fixture("south_hero.json");
    CurtailmentResult res = solve_curtailment(net, CurtailNorm::Linf);
    const DhcProblem prob = build_dhc_problem(net);
    auto oracle = oracles::linf_bisection(prob);
    REQUIRE(res.curtailed.size() == 3);
    size_t j = 0;
    double level = 0.0;
    for (const auto& [bus, c] : res.curtailed) {
        CHECK(c == Catch::Approx(oracle[j]).margin(1e-6));
        CHECK(c > 0.0);
        level = std::max(level, c);
        ++j;
    }
    // equitable: every positive entry sits at the binding level (none saturate here)
    for (const auto& [bus, c] : res.curtailed) CHECK(c == Catch::Approx(level).margin(1e-9));
    CHECK(res.objective == Catch::Approx(level).margin(1e-12));
}

TEST_CASE("l1 curtailment matches the lattice oracle and is sparse") {
    FeederNetwork net = load_fixture("south_hero.json");
    CurtailmentResult res = solve_curtailment(net, CurtailNorm::L1);
    const DhcProblem prob = build_dhc_problem(net);
    const double oracle_obj = oracles::l1_lattice_objective(prob);
    CHECK(res.objective <= oracle_obj + 1e-9);          // LP is at least as good as the lattice
    CHECK(std::fabs(res.objective - oracle_obj) <= 0.001); // and within one lattice step

    // one binding constraint -> at most one nonzero, at the most sensitive bus
    size_t binding = 0;
    for (double b : prob.needed)
        if (b > 0.0) ++binding;
    REQUIRE(binding == 1);
    std::vector<int> nonzero;
    for (const auto& [bus, c] : res.curtailed)
        if (c > 1e-9) nonzero.push_back(bus);
    REQUIRE(nonzero.size() == 1);
    CHECK(nonzero[0] == 4); // bus 4 has the largest sensitivity to its own violation
}

TEST_CASE("l2 curtailment respects boxes and beats neither l1 nor the constraints") {
    FeederNetwork net = load_fixture("south_hero.json");
    CurtailmentResult l1 = solve_curtailment(net, CurtailNorm::L1);
    CurtailmentResult l2 = solve_curtailment(net, CurtailNorm::L2);
    const DhcProblem prob = build_dhc_problem(net);

    double l1_norm_of_l2 = 0.0;
    size_t j = 0;
    for (const auto& [bus, c] : l2.curtailed) {
        CHECK(c >= -1e-12);
        CHECK(c <= prob.rating[j] + 1e-9);
        l1_norm_of_l2 += c;
        ++j;
    }
    CHECK(l1.objective <= l1_norm_of_l2 + 1e-9);

    // linear constraints hold at the l2 solution
    std::vector<double> c(prob.rating.size());
    j = 0;
    for (const auto& [bus, value] : l2.curtailed) c[j++] = value;
    for (size_t i = 0; i < prob.needed.size(); ++i) {
        double red = 0.0;
        for (size_t v = 0; v < c.size(); ++v) red += prob.sens(i, v) * c[v];
        CHECK(red + 1e-9 >= prob.needed[i]);
    }
}

TEST_CASE("post-curtailment nonlinear re-solve stays under vmax on the fixtures") {
    for (auto norm : {CurtailNorm::L1, CurtailNorm::L2, CurtailNorm::Linf}) {
        FeederNetwork net = load_fixture("south_hero.json");
        CurtailmentResult res = solve_curtailment(net, norm);
        for (const auto& [bus, c] : res.curtailed)
            net.solar[bus] = std::max(0.0, net.solar[bus] - c);
        PowerFlowSolution sol = solve_power_flow(net);
        for (const auto& [bus, v] : sol.voltage)
            CHECK(v <= net.vmax + 1e-6);
    }
}

TEST_CASE("full curtailment that still violates limits is infeasible") {
    // capacitor boost keeps voltages high even with every solar system off,
    // so no curtailment vector can satisfy the band
    FeederNetwork net = load_fixture("south_hero.json");
    net.capacitors[5] = 0.5;
    net.capacitors[7] = 0.5;
    net.vmax = 1.01;
    CHECK_THROWS_AS(solve_curtailment(net, CurtailNorm::Linf), DhcError);
    CHECK_THROWS_AS(solve_curtailment(net, CurtailNorm::L1), DhcError);
    CHECK_THROWS_AS(solve_curtailment(net, CurtailNorm::L2), DhcError);
}

TEST_CASE("dhc without solar is rejected") {
    FeederNetwork net = load_fixture("two_bus.json");
    CHECK_THROWS_AS(solve_curtailment(net, CurtailNorm::L1), DhcError);
}

TEST_CASE("a feasible network needs no slack currents") {
    FeederNetwork net = load_fixture("two_bus.json");
    for (auto norm : {SlackNorm::L1, SlackNorm::L2}) {
        InfeasibilityResult res = solve_infeasibility(net, norm);
        CHECK(res.objective == 0.0);
        for (const auto& [bus, s] : res.slack) CHECK(s == 0.0);
    }
}

TEST_CASE("l2 slack matches the active-set enumeration oracle") {
    FeederNetwork net = undervoltage_fixture();
    InfeasibilityResult res = solve_infeasibility(net, SlackNorm::L2);
    const SlackProblem prob = build_slack_problem(net);

    std::vector<double> h;
    for (double v : prob.raise) h.push_back(v);
    for (double v : prob.lower) h.push_back(v);
    auto oracle = oracles::l2_active_set_enumeration(slack_constraint_rows(prob), h, 3);

    REQUIRE(res.slack.size() == oracle.size());
    size_t j = 0;
    for (const auto& [bus, s] : res.slack) {
        CHECK(s == Catch::Approx(oracle[j]).margin(1e-6));
        ++j;
    }
}

TEST_CASE("l1 slack is sparse and no costlier than the l2 answer") {
    FeederNetwork net = undervoltage_fixture();
    InfeasibilityResult l1 = solve_infeasibility(net, SlackNorm::L1);
    InfeasibilityResult l2 = solve_infeasibility(net, SlackNorm::L2);

    double l1_of_l2 = 0.0;
    for (const auto& [bus, s] : l2.slack) l1_of_l2 += std::fabs(s);
    CHECK(l1.objective <= l1_of_l2 + 1e-9);

    const SlackProblem prob = build_slack_problem(net);
    size_t binding = 0;
    for (double v : prob.raise)
        if (v > 0.0) ++binding;
    for (double v : prob.lower)
        if (v > 0.0) ++binding;
    size_t support = 0;
    for (const auto& [bus, s] : l1.slack)
        if (std::fabs(s) > 1e-9) ++support;
    CHECK(support <= binding);

    // the linearized voltage band holds at the l1 point
    std::vector<double> s(prob.slack_buses.size());
    size_t j = 0;
    for (const auto& [bus, value] : l1.slack) s[j++] = value;
    for (size_t i = 0; i < prob.raise.size(); ++i) {
        double delta = 0.0;
        for (size_t v = 0; v < s.size(); ++v) delta += prob.sens(i, v) * s[v];
        CHECK(delta + 1e-9 >= prob.raise[i]);
        CHECK(-delta + 1e-9 >= prob.lower[i]);
    }
}

TEST_CASE("slack injections on an overvoltage feeder absorb power") {
    FeederNetwork net = load_fixture("south_hero.json");
    InfeasibilityResult res = solve_infeasibility(net, SlackNorm::L2);
    CHECK(res.objective > 0.0);
    double most_negative = 0.0;
    for (const auto& [bus, s] : res.slack) most_negative = std::min(most_negative, s);
    CHECK(most_negative < 0.0); // negative slack = absorbed injection

    // applying the slacks restores the band, within linearization error
    for (const auto& [bus, s] : res.slack) net.loads[bus].first -= s;
    PowerFlowSolution sol = solve_power_flow(net);
    for (const auto& [bus, v] : sol.voltage) {
        CHECK(v <= net.vmax + 1e-4);
        CHECK(v >= net.vmin - 1e-4);
    }
}
