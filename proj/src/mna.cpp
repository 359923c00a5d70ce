#include "circsim/mna.hpp"

#include <set>

namespace circsim {

MnaLayout make_layout(const NetMap& netmap, std::span<const LinearStamp> stamps, int extra_nodes) {
    std::set<NodeId> nodes;
    for (const auto& net : netmap.nets) {
        if (!net.is_ground) nodes.insert(net.id);
    }
    const auto first_internal = static_cast<NodeId>(netmap.nets.size()) + 1;
    for (int i = 0; i < extra_nodes; ++i) nodes.insert(first_internal + i);

    MnaLayout layout;
    auto note_node = [&](NodeId n) {
        if (n != 0) nodes.insert(n);
    };
    for (const auto& stamp : stamps) {
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Conductance>) {
                    note_node(s.a);
                    note_node(s.b);
                } else if constexpr (std::is_same_v<T, VoltageSourceBranch>) {
                    note_node(s.plus);
                    note_node(s.minus);
                    if (layout.branch_index.emplace(s.branch, layout.n_branches()).second) layout.branches.push_back(s.branch);
                } else {
                    note_node(s.from);
                    note_node(s.to);
                }
            },
            stamp);
    }
    for (NodeId n : nodes) {
        layout.node_index.emplace(n, layout.n_nodes());
        layout.nodes.push_back(n);
    }
    return layout;
}

MnaSystem assemble(std::span<const LinearStamp> stamps, std::span<const CompanionStamp> companions, const NetMap& netmap,
                   const SolveOptions& opts) {
    int extra = 0;
    const auto first_internal = static_cast<NodeId>(netmap.nets.size()) + 1;
    for (const auto& c : companions) {
        for (NodeId n : c.nodes) extra = std::max(extra, n - first_internal + 1);
    }
    return assemble<double>(make_layout(netmap, stamps, extra), stamps, companions, opts.gmin);
}

}  // namespace circsim
