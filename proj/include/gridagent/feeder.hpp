#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridagent/workflow.hpp"

namespace gridagent {

struct FeederSchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class BusType { Source, Load };

struct Bus {
    int id = 0;
    BusType type = BusType::Load;
};

struct Line {
    int from = 0;
    int to = 0;
    double r = 0.0; // series resistance, pu
    double x = 0.0; // series reactance, pu
};

// Single-phase radial feeder on a 1.0 pu voltage base. Loads consume (p, q);
// solar entries inject active power; capacitors inject reactive power.
struct FeederNetwork {
    std::string name;
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::map<int, std::pair<double, double>> loads; // bus -> (p, q) consumed
    std::map<int, double> solar;                    // bus -> rated injection
    std::map<int, double> capacitors;               // bus -> reactive injection
    double vmin = 0.95;
    double vmax = 1.05;

    int source_id() const {
        for (const auto& b : buses)
            if (b.type == BusType::Source) return b.id;
        throw FeederSchemaError("no source bus");
    }

    bool has_bus(int id) const {
        return std::any_of(buses.begin(), buses.end(), [&](const Bus& b) { return b.id == id; });
    }

    // Net complex consumption at a bus: load minus solar/capacitor injection.
    std::pair<double, double> net_consumption(int id) const {
        double p = 0.0, q = 0.0;
        if (auto it = loads.find(id); it != loads.end()) {
            p += it->second.first;
            q += it->second.second;
        }
        if (auto it = solar.find(id); it != solar.end()) p -= it->second;
        if (auto it = capacitors.find(id); it != capacitors.end()) q -= it->second;
        return {p, q};
    }
};

// Parent/child structure rooted at the source, in breadth-first order.
// Precomputed once per network; every sweep and sensitivity query reads it.
struct FeederTree {
    int source = 0;
    std::vector<int> order;               // BFS order, source first
    std::map<int, int> parent;            // bus -> parent bus (absent for source)
    std::map<int, std::vector<int>> kids; // bus -> children
    std::map<int, std::pair<double, double>> branch; // bus -> (r, x) of line into it
};

inline FeederTree build_tree(const FeederNetwork& net) {
    std::map<int, std::vector<std::pair<int, const Line*>>> adj;
    for (const auto& l : net.lines) {
        adj[l.from].push_back({l.to, &l});
        adj[l.to].push_back({l.from, &l});
    }
    FeederTree t;
    t.source = net.source_id();
    std::vector<int> queue{t.source};
    std::map<int, bool> seen{{t.source, true}};
    for (size_t i = 0; i < queue.size(); ++i) {
        int u = queue[i];
        t.order.push_back(u);
        for (const auto& [v, line] : adj[u]) {
            if (seen.count(v)) continue;
            seen[v] = true;
            t.parent[v] = u;
            t.kids[u].push_back(v);
            t.branch[v] = {line->r, line->x};
            queue.push_back(v);
        }
    }
    if (t.order.size() != net.buses.size())
        throw FeederSchemaError("network is not connected");
    return t;
}

// Structural validation used by load_network; violations are listed together.
inline void validate_feeder(const FeederNetwork& net) {
    std::vector<std::string> problems;
    if (net.buses.empty()) problems.push_back("no buses");
    int sources = 0;
    std::map<int, int> id_count;
    for (const auto& b : net.buses) {
        if (b.type == BusType::Source) ++sources;
        id_count[b.id]++;
    }
    for (const auto& [id, n] : id_count)
        if (n > 1) problems.push_back("duplicate bus id " + std::to_string(id));
    if (sources != 1) problems.push_back("expected exactly one source bus, found " + std::to_string(sources));
    if (!net.buses.empty() && net.lines.size() + 1 != net.buses.size())
        problems.push_back("line count must equal bus count minus one (tree violation)");
    for (const auto& l : net.lines) {
        if (!id_count.count(l.from) || !id_count.count(l.to))
            problems.push_back("line references unknown bus " + std::to_string(id_count.count(l.from) ? l.to : l.from));
        if (l.r <= 0.0 || l.x <= 0.0)
            problems.push_back("line " + std::to_string(l.from) + "-" + std::to_string(l.to) +
                               " requires positive r and x");
    }
    for (const auto& [bus, rated] : net.solar) {
        if (!id_count.count(bus)) problems.push_back("solar at unknown bus " + std::to_string(bus));
        if (rated < 0.0) problems.push_back("negative solar rating at bus " + std::to_string(bus));
    }
    for (const auto& [bus, q] : net.capacitors) {
        if (!id_count.count(bus)) problems.push_back("capacitor at unknown bus " + std::to_string(bus));
        if (q < 0.0) problems.push_back("negative capacitor injection at bus " + std::to_string(bus));
    }
    for (const auto& [bus, pq] : net.loads)
        if (!id_count.count(bus)) problems.push_back("load at unknown bus " + std::to_string(bus));
    if (!(net.vmin < 1.0 && 1.0 < net.vmax))
        problems.push_back("voltage limits must satisfy vmin < 1.0 < vmax");
    if (problems.empty() && sources == 1) {
        try {
            build_tree(net);
        } catch (const FeederSchemaError& e) {
            problems.push_back(e.what());
        }
    }
    if (!problems.empty()) {
        std::string msg;
        for (const auto& p : problems) {
            if (!msg.empty()) msg += "; ";
            msg += p;
        }
        throw FeederSchemaError(msg);
    }
}

inline FeederNetwork feeder_from_json(const Json& j) {
    if (j.value("format", "") != "feeder/1")
        throw FeederSchemaError("unsupported format, expected \"feeder/1\"");
    FeederNetwork net;
    net.name = j.value("name", "");
    net.vmin = j.value("vmin", 0.95);
    net.vmax = j.value("vmax", 1.05);
    for (const auto& bj : j.at("buses")) {
        Bus b;
        b.id = bj.at("id").get<int>();
        std::string type = bj.value("type", "load");
        if (type == "source") b.type = BusType::Source;
        else if (type == "load") b.type = BusType::Load;
        else throw FeederSchemaError("unknown bus type: " + type);
        net.buses.push_back(b);
    }
    for (const auto& lj : j.value("lines", Json::array())) {
        Line l;
        l.from = lj.at("from").get<int>();
        l.to = lj.at("to").get<int>();
        l.r = lj.at("r").get<double>();
        l.x = lj.at("x").get<double>();
        net.lines.push_back(l);
    }
    auto read_bus_map = [](const Json& obj, auto&& put) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            auto id = parse_int(it.key());
            if (!id) throw FeederSchemaError("bus key is not an integer: " + it.key());
            put(static_cast<int>(*id), it.value());
        }
    };
    if (j.contains("loads"))
        read_bus_map(j["loads"], [&](int id, const Json& v) {
            net.loads[id] = {v.at("p").get<double>(), v.at("q").get<double>()};
        });
    if (j.contains("solar"))
        read_bus_map(j["solar"], [&](int id, const Json& v) { net.solar[id] = v.get<double>(); });
    if (j.contains("capacitors"))
        read_bus_map(j["capacitors"], [&](int id, const Json& v) { net.capacitors[id] = v.get<double>(); });
    validate_feeder(net);
    return net;
}

inline Json feeder_to_json(const FeederNetwork& net) {
    Json buses = Json::array();
    for (const auto& b : net.buses)
        buses.push_back({{"id", b.id}, {"type", b.type == BusType::Source ? "source" : "load"}});
    Json lines = Json::array();
    for (const auto& l : net.lines)
        lines.push_back({{"from", l.from}, {"to", l.to}, {"r", l.r}, {"x", l.x}});
    Json loads = Json::object(), solar = Json::object(), caps = Json::object();
    for (const auto& [id, pq] : net.loads)
        loads[std::to_string(id)] = {{"p", pq.first}, {"q", pq.second}};
    for (const auto& [id, rated] : net.solar) solar[std::to_string(id)] = rated;
    for (const auto& [id, q] : net.capacitors) caps[std::to_string(id)] = q;
    return {{"format", "feeder/1"}, {"name", net.name},   {"vmin", net.vmin},
            {"vmax", net.vmax},     {"buses", buses},     {"lines", lines},
            {"loads", loads},       {"solar", solar},     {"capacitors", caps}};
}

} // namespace gridagent
