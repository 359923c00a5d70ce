#pragma once

// Modified nodal analysis system assembly.

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "circsim/devices.hpp"
#include "circsim/lu.hpp"
#include "circsim/nets.hpp"

namespace circsim {

struct SolveOptions {
    double reltol = 1e-3;
    double vntol = 1e-6;          // V
    double abstol = 1e-12;        // A
    int max_newton_iters = 100;
    double gmin = 1e-12;          // S, from every node to reference
    int gmin_steps = 10;
    int source_steps = 10;
    double kcl_tol = 1e-10;       // A, max net current imbalance accepted as converged
};

/// Linearized nonlinear element at the current Newton iterate, bound to nodes.
struct CompanionStamp {
    std::vector<NodeId> nodes;
    Eigen::MatrixXd jacobian;
    Eigen::VectorXd equivalent_currents;  // currents - jacobian * v
};

/// Row/column layout: non-reference nodes first, in increasing NodeId order,
/// then one row per voltage-source branch in order of first appearance.
struct MnaLayout {
    std::map<NodeId, int> node_index;
    std::map<std::string, int> branch_index;
    std::vector<NodeId> nodes;          // row -> node
    std::vector<std::string> branches;  // (row - n_nodes) -> branch

    [[nodiscard]] int n_nodes() const noexcept { return static_cast<int>(nodes.size()); }
    [[nodiscard]] int n_branches() const noexcept { return static_cast<int>(branches.size()); }
    [[nodiscard]] int size() const noexcept { return n_nodes() + n_branches(); }
    /// -1 for the reference node.
    [[nodiscard]] int row(NodeId node) const {
        if (node == 0) return -1;
        return node_index.at(node);
    }
};

/// Every non-ground net gets a row; `extra_nodes` covers device-internal nodes.
[[nodiscard]] MnaLayout make_layout(const NetMap& netmap, std::span<const LinearStamp> stamps, int extra_nodes = 0);

template <typename Scalar>
struct MnaSystemT {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    MnaLayout layout;
    Matrix matrix;
    Vector rhs;

    [[nodiscard]] int n_nodes() const noexcept { return layout.n_nodes(); }
    [[nodiscard]] int n_branches() const noexcept { return layout.n_branches(); }
};

using MnaSystem = MnaSystemT<double>;

/// Stamps everything into a fresh system over `layout`. Independent source
/// values are multiplied by `source_scale`.
template <typename Scalar = double>
[[nodiscard]] MnaSystemT<Scalar> assemble(const MnaLayout& layout, std::span<const LinearStamp> stamps,
                                          std::span<const CompanionStamp> companions, double gmin,
                                          double source_scale = 1.0) {
    MnaSystemT<Scalar> sys;
    sys.layout = layout;
    const int n = layout.size();
    sys.matrix = MnaSystemT<Scalar>::Matrix::Zero(n, n);
    sys.rhs = MnaSystemT<Scalar>::Vector::Zero(n);
    auto& A = sys.matrix;
    auto& z = sys.rhs;

    auto add = [&](int r, int c, Scalar v) {
        if (r >= 0 && c >= 0) A(r, c) += v;
    };
    auto inject = [&](int r, Scalar v) {
        if (r >= 0) z[r] += v;
    };

    for (const auto& stamp : stamps) {
        if (const auto* g = std::get_if<Conductance>(&stamp)) {
            const int a = layout.row(g->a);
            const int b = layout.row(g->b);
            const Scalar s = g->siemens;
            add(a, a, s);
            add(b, b, s);
            add(a, b, -s);
            add(b, a, -s);
        } else if (const auto* v = std::get_if<VoltageSourceBranch>(&stamp)) {
            const int k = layout.n_nodes() + layout.branch_index.at(v->branch);
            const int p = layout.row(v->plus);
            const int m = layout.row(v->minus);
            add(p, k, Scalar(1));
            add(m, k, Scalar(-1));
            add(k, p, Scalar(1));
            add(k, m, Scalar(-1));
            z[k] += Scalar(v->volts * source_scale);
        } else {
            const auto& i = std::get<CurrentSource>(stamp);
            inject(layout.row(i.from), Scalar(-i.amperes * source_scale));
            inject(layout.row(i.to), Scalar(i.amperes * source_scale));
        }
    }

    for (const auto& c : companions) {
        const auto pins = static_cast<Eigen::Index>(c.nodes.size());
        for (Eigen::Index i = 0; i < pins; ++i) {
            const int r = layout.row(c.nodes[static_cast<std::size_t>(i)]);
            if (r < 0) continue;
            inject(r, Scalar(-c.equivalent_currents[i]));
            for (Eigen::Index j = 0; j < pins; ++j) add(r, layout.row(c.nodes[static_cast<std::size_t>(j)]), Scalar(c.jacobian(i, j)));
        }
    }

    for (int r = 0; r < layout.n_nodes(); ++r) A(r, r) += Scalar(gmin);
    return sys;
}

/// Convenience form building the layout from the stamps.
[[nodiscard]] MnaSystem assemble(std::span<const LinearStamp> stamps, std::span<const CompanionStamp> companions,
                                 const NetMap& netmap, const SolveOptions& opts);

/// Node voltages then branch currents. Throws SingularMatrix.
template <typename Scalar>
[[nodiscard]] typename MnaSystemT<Scalar>::Vector solve_linear(const MnaSystemT<Scalar>& sys) {
    return lu_solve(sys.matrix, sys.rhs);
}

}  // namespace circsim
