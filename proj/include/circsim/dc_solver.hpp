#pragma once

// DC operating point: Newton-Raphson with gmin stepping and source stepping
// as fallbacks.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "circsim/error.hpp"
#include "circsim/mna.hpp"
#include "circsim/nets.hpp"
#include "circsim/sketch.hpp"

namespace circsim {

enum class Strategy { Direct, GminStepping, SourceStepping };

[[nodiscard]] std::string_view to_string(Strategy s) noexcept;

/// Terminal-level view of one component at the operating point.
struct ElementState {
    std::string kind;
    bool excluded = false;                      // not simulatable; carried only
    std::map<std::string, double> pin_voltages;
    std::map<std::string, double> pin_currents; // A, flowing from the net into the pin
    double power = 0.0;                         // W absorbed (negative when delivering)

    bool operator==(const ElementState&) const = default;
};

struct Solution {
    std::map<int, double> node_voltages;          // net id -> V; ground net = 0
    std::map<std::string, double> branch_currents;
    std::map<std::string, ElementState> element_states;
    bool converged = false;
    int iterations = 0;
    Strategy strategy = Strategy::Direct;
    double gmin = 0.0;           // shunt conductance left on every node
    double residual_norm = 0.0;  // max net current imbalance, A

    [[nodiscard]] double voltage(const NetMap& netmap, const Terminal& t) const {
        return node_voltages.at(netmap.net_id(t));
    }

    bool operator==(const Solution&) const = default;
};

class NoConvergence : public Error {
public:
    NoConvergence(double residual, int iterations)
        : Error(ErrorCode::NoConvergence, "no convergence after " + std::to_string(iterations) +
                                              " iterations (residual " + std::to_string(residual) + " A)"),
          residual_(residual),
          iterations_(iterations) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }
    [[nodiscard]] int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

/// Singular system; `where` names the net, device node or branch of the
/// failing unknown.
class SingularCircuit : public Error {
public:
    explicit SingularCircuit(std::string where)
        : Error(ErrorCode::Singular, "singular circuit matrix at " + where), where_(std::move(where)) {}

    [[nodiscard]] const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

/// DC operating point of a validated sketch. Non-simulatable parts are left
/// out and flagged in element_states. Throws NoConvergence or SingularCircuit.
[[nodiscard]] Solution solve_op(const Sketch& sketch, const NetMap& netmap, const SolveOptions& opts = {});

}  // namespace circsim
