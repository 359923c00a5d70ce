#pragma once

#include <map>
#include <set>
#include <vector>

#include "circsim/sketch.hpp"

namespace circsim {

struct Net {
    int id = 0;  // 1-based
    std::set<Terminal> terminals;
    bool is_ground = false;

    bool operator==(const Net&) const = default;
};

/// Partition of every component terminal into electrical nets.
struct NetMap {
    std::vector<Net> nets;  // nets[i].id == i + 1
    std::map<Terminal, int> terminal_index;

    [[nodiscard]] const Net& net(int id) const { return nets.at(static_cast<std::size_t>(id - 1)); }
    [[nodiscard]] bool contains(const Terminal& t) const { return terminal_index.contains(t); }
    /// Net id of `t`; throws Error(UnknownTerminal).
    [[nodiscard]] int net_id(const Terminal& t) const;
    /// 0 when the sketch has no ground marker.
    [[nodiscard]] int ground_net() const noexcept;

    bool operator==(const NetMap&) const = default;
};

/// Builds the net partition. Terminals share a net iff a chain of wires,
/// shared tie-point groups or direct pin-to-pin placements joins them. Every
/// pin of a `ground` component lands in one shared reference net. Nets are
/// numbered from 1 in order of their smallest (component, pin) member.
[[nodiscard]] NetMap extract_nets(const Sketch& sketch);

/// Every terminal electrically joined to `t`, including `t` itself.
[[nodiscard]] std::set<Terminal> net_of_terminal(const NetMap& netmap, const Terminal& t);

}  // namespace circsim
