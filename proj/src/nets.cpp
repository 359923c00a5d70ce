#include "circsim/nets.hpp"

#include <algorithm>
#include <numeric>

#include "circsim/devices.hpp"
#include "circsim/error.hpp"

namespace circsim {

int NetMap::net_id(const Terminal& t) const {
    auto it = terminal_index.find(t);
    if (it == terminal_index.end()) throw Error(ErrorCode::UnknownTerminal, "unknown terminal " + to_string(t));
    return it->second;
}

int NetMap::ground_net() const noexcept {
    for (const auto& n : nets) {
        if (n.is_ground) return n.id;
    }
    return 0;
}

namespace {

class DisjointSets {
public:
    int add() {
        parent_.push_back(static_cast<int>(parent_.size()));
        return parent_.back();
    }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<int> parent_;
};

// Graph vertices: every terminal plus every tie-point group touched.
class ConnectivityGraph {
public:
    int terminal(const Terminal& t) {
        auto [it, inserted] = terminals_.try_emplace(t, 0);
        if (inserted) it->second = sets_.add();
        return it->second;
    }

    int location(const Location& loc) {
        if (const auto* d = std::get_if<DirectTerminal>(&loc)) return terminal(d->terminal);
        std::string key;
        if (const auto* h = std::get_if<BreadboardHole>(&loc)) {
            key = h->board + "|col" + std::to_string(h->column) + (h->row <= 'e' ? "ae" : "fj");
        } else {
            const auto& r = std::get<RailHole>(loc);
            key = r.board + "|rail" + std::string(to_string(r.rail));
        }
        auto [it, inserted] = groups_.try_emplace(key, 0);
        if (inserted) it->second = sets_.add();
        return it->second;
    }

    DisjointSets& sets() { return sets_; }
    const std::map<Terminal, int>& terminals() const { return terminals_; }

private:
    DisjointSets sets_;
    std::map<Terminal, int> terminals_;
    std::map<std::string, int> groups_;
};

}  // namespace

NetMap extract_nets(const Sketch& sketch) {
    ConnectivityGraph graph;
    std::vector<int> ground_vertices;

    for (const auto& c : sketch.components) {
        const auto desc = descriptor_for(c);
        for (const auto& pin : desc.pins) {
            const int v = graph.terminal({c.id, pin});
            if (c.kind == "ground") ground_vertices.push_back(v);
        }
        for (const auto& [pin, loc] : c.placements) {
            const int v = graph.terminal({c.id, pin});
            graph.sets().unite(v, graph.location(loc));
        }
    }
    for (const auto& w : sketch.wires) graph.sets().unite(graph.location(w.a), graph.location(w.b));
    for (std::size_t i = 1; i < ground_vertices.size(); ++i) graph.sets().unite(ground_vertices[0], ground_vertices[i]);

    std::map<int, std::set<Terminal>> by_root;
    for (const auto& [t, v] : graph.terminals()) by_root[graph.sets().find(v)].insert(t);

    std::vector<std::set<Terminal>> groups;
    groups.reserve(by_root.size());
    for (auto& [root, members] : by_root) groups.push_back(std::move(members));
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return *a.begin() < *b.begin(); });

    std::set<std::string> grounds;
    for (const auto& c : sketch.components) {
        if (c.kind == "ground") grounds.insert(c.id);
    }

    NetMap map;
    map.nets.reserve(groups.size());
    for (auto& members : groups) {
        Net net;
        net.id = static_cast<int>(map.nets.size()) + 1;
        net.is_ground = std::any_of(members.begin(), members.end(),
                                    [&](const Terminal& t) { return grounds.contains(t.component); });
        for (const auto& t : members) map.terminal_index.emplace(t, net.id);
        net.terminals = std::move(members);
        map.nets.push_back(std::move(net));
    }
    return map;
}

std::set<Terminal> net_of_terminal(const NetMap& netmap, const Terminal& t) {
    return netmap.net(netmap.net_id(t)).terminals;
}

}  // namespace circsim
