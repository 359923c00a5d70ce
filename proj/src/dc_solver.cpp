#include "circsim/dc_solver.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "circsim/devices.hpp"
#include "circsim/instruments.hpp"

namespace circsim {

std::string_view to_string(Strategy s) noexcept {
    switch (s) {
        case Strategy::Direct: return "direct";
        case Strategy::GminStepping: return "gmin_stepping";
        case Strategy::SourceStepping: return "source_stepping";
    }
    return "";
}

namespace {

constexpr double kGminStart = 1e-2;

struct NonlinearElement {
    std::string id;
    NonlinearModel model;
    std::vector<NodeId> nodes;
};

struct Circuit {
    std::vector<const ComponentInstance*> components;  // sorted by id
    std::vector<LinearStamp> stamps;
    std::vector<NonlinearElement> nonlinear;
    std::vector<std::string> internal_labels;
    MnaLayout layout;
};

Circuit compile(const Sketch& sketch, const NetMap& netmap) {
    Circuit c;
    for (const auto& comp : sketch.components) c.components.push_back(&comp);
    std::sort(c.components.begin(), c.components.end(), [](const auto* a, const auto* b) { return a->id < b->id; });

    StampContext ctx(netmap);
    for (const auto* comp : c.components) {
        const auto desc = registry_lookup(comp->kind);
        if (!desc.simulatable) continue;
        auto stamps = comp->kind == "multimeter" ? internal_model(meter_config(*comp), ctx) : stamp_linear(*comp, ctx);
        c.stamps.insert(c.stamps.end(), std::make_move_iterator(stamps.begin()), std::make_move_iterator(stamps.end()));
        if (auto model = nonlinear_model(*comp)) {
            NonlinearElement e{comp->id, *model, {}};
            for (const auto& pin : nonlinear_pins(*model)) e.nodes.push_back(ctx.node({comp->id, pin}));
            c.nonlinear.push_back(std::move(e));
        }
    }
    c.internal_labels = ctx.internal_labels();
    c.layout = make_layout(netmap, c.stamps, static_cast<int>(c.internal_labels.size()));
    return c;
}

std::string describe_unknown(const Circuit& c, const NetMap& netmap, Eigen::Index k) {
    const auto& layout = c.layout;
    if (k >= layout.n_nodes()) return "branch " + layout.branches[static_cast<std::size_t>(k - layout.n_nodes())];
    const NodeId node = layout.nodes[static_cast<std::size_t>(k)];
    if (node <= static_cast<NodeId>(netmap.nets.size())) {
        return "net " + std::to_string(node) + " (" + to_string(*netmap.net(node).terminals.begin()) + ")";
    }
    return "node " + c.internal_labels[static_cast<std::size_t>(node - netmap.nets.size() - 1)];
}

double node_voltage(const MnaLayout& layout, const Eigen::VectorXd& x, NodeId node) {
    const int r = layout.row(node);
    return r < 0 ? 0.0 : x[r];
}

struct NewtonState {
    Eigen::VectorXd x;
    std::vector<std::vector<double>> junctions;
};

struct NewtonOutcome {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
};

class NewtonSolver {
public:
    NewtonSolver(const Circuit& circuit, const NetMap& netmap, const SolveOptions& opts)
        : c_(circuit), netmap_(netmap), opts_(opts) {}

    NewtonState initial_state() const {
        NewtonState s;
        s.x = Eigen::VectorXd::Zero(c_.layout.size());
        // Junctions start zero-biased.
        for (const auto& e : c_.nonlinear) {
            const std::vector<double> zeros(e.nodes.size(), 0.0);
            s.junctions.emplace_back(evaluate(e.model, zeros).junctions.size(), 0.0);
        }
        return s;
    }

    // Iterates from `state` (updated in place) until converged or out of iterations.
    NewtonOutcome run(NewtonState& state, double gmin, double source_scale) const {
        NewtonOutcome out;
        const int n_nodes = c_.layout.n_nodes();
        std::vector<double> prev_currents;
        bool step_small = false;
        bool step_stalled = false;

        for (int iter = 1;; ++iter) {
            std::vector<CompanionStamp> companions;
            std::vector<double> currents;
            bool limited = false;
            companions.reserve(c_.nonlinear.size());
            for (std::size_t i = 0; i < c_.nonlinear.size(); ++i) {
                const auto& e = c_.nonlinear[i];
                std::vector<double> v;
                for (NodeId n : e.nodes) v.push_back(node_voltage(c_.layout, state.x, n));
                auto& junctions = state.junctions[i];
                const auto ev = evaluate(e.model, v, std::span<const double>(junctions));
                limited = limited || ev.limited;
                junctions = ev.junctions;
                currents.push_back(ev.element_current);
                companions.push_back({e.nodes, ev.jacobian, ev.equivalent_currents()});
            }

            const auto sys = assemble<double>(c_.layout, c_.stamps, companions, gmin, source_scale);

            if (!c_.nonlinear.empty() && iter > 1 && !limited) {
                const Eigen::VectorXd r = sys.matrix * state.x - sys.rhs;
                out.residual = n_nodes > 0 ? r.head(n_nodes).cwiseAbs().maxCoeff() : 0.0;
                bool currents_ok = true;
                for (std::size_t i = 0; i < currents.size(); ++i) {
                    const double tol = opts_.abstol + opts_.reltol * std::max(std::abs(currents[i]), std::abs(prev_currents[i]));
                    currents_ok = currents_ok && std::abs(currents[i] - prev_currents[i]) <= tol;
                }
                if (step_small && currents_ok && (out.residual <= opts_.kcl_tol || step_stalled)) {
                    out.converged = true;
                    out.iterations = iter - 1;
                    return out;
                }
            }
            if (iter > opts_.max_newton_iters) {
                out.iterations = iter - 1;
                return out;
            }

            Eigen::VectorXd x_new;
            try {
                x_new = solve_linear(sys);
            } catch (const SingularMatrix& e) {
                throw SingularCircuit(describe_unknown(c_, netmap_, e.column()));
            }
            if (!x_new.allFinite()) {
                out.iterations = iter;
                out.residual = std::numeric_limits<double>::infinity();
                return out;
            }

            if (c_.nonlinear.empty()) {
                const Eigen::VectorXd r = sys.matrix * x_new - sys.rhs;
                state.x = std::move(x_new);
                out.converged = true;
                out.iterations = iter;
                out.residual = n_nodes > 0 ? r.head(n_nodes).cwiseAbs().maxCoeff() : 0.0;
                return out;
            }

            step_small = true;
            step_stalled = true;
            for (int r = 0; r < n_nodes; ++r) {
                const double delta = std::abs(x_new[r] - state.x[r]);
                const double scale = std::max(std::abs(x_new[r]), std::abs(state.x[r]));
                step_small = step_small && delta <= opts_.vntol + opts_.reltol * scale;
                step_stalled = step_stalled && delta <= 1e-13 * (1.0 + scale);
            }
            prev_currents = std::move(currents);
            state.x = std::move(x_new);
        }
    }

private:
    const Circuit& c_;
    const NetMap& netmap_;
    const SolveOptions& opts_;
};

ElementState element_state(const ComponentInstance& comp, const NetMap& netmap, const Circuit& circuit,
                           const Eigen::VectorXd& x, const std::map<std::string, double>& branches) {
    const auto desc = descriptor_for(comp);
    ElementState st;
    st.kind = comp.kind;
    st.excluded = !desc.simulatable;

    auto node_of = [&](const std::string& pin) {
        const int id = netmap.net_id({comp.id, pin});
        return netmap.net(id).is_ground ? 0 : id;
    };
    for (const auto& pin : desc.pins) {
        st.pin_voltages[pin] = node_voltage(circuit.layout, x, node_of(pin));
        st.pin_currents[pin] = 0.0;
    }
    if (st.excluded) return st;

    auto& v = st.pin_voltages;
    auto& i = st.pin_currents;
    auto branch = [&]() {
        auto it = branches.find(comp.id);
        return it == branches.end() ? 0.0 : it->second;
    };
    auto through = [&](const std::string& a, const std::string& b, double siemens) {
        const double cur = (v[a] - v[b]) * siemens;
        i[a] += cur;
        i[b] -= cur;
    };
    const std::string& k = comp.kind;

    if (k == "resistor" || k == "dc_motor") {
        through("1", "2", 1.0 / comp.number("resistance", std::get<double>(desc.property("resistance")->default_value)));
    } else if (k == "potentiometer") {
        const auto [ra, rb] = potentiometer_split(comp.number("max_resistance", 10000.0), comp.number("position", 0.5));
        through("1", "wiper", 1.0 / ra);
        through("wiper", "2", 1.0 / rb);
    } else if (k == "battery" || k == "dc_supply" || k == "inductor") {
        const std::string plus = k == "inductor" ? "1" : "+";
        const std::string minus = k == "inductor" ? "2" : "-";
        i[plus] = branch();
        i[minus] = -branch();
    } else if (k == "switch_spst") {
        if (comp.text("state", "open") == "closed") through("1", "2", 1.0 / kSwitchOnResistance);
    } else if (k == "switch_spdt") {
        through("COM", comp.text("state", "T1"), 1.0 / kSwitchOnResistance);
    } else if (k == "ir_sensor") {
        i["OUT"] = branch();
        i["GND"] = -branch();
    } else if (k == "multimeter") {
        const auto cfg = meter_config(comp);
        if (validate_probes(cfg, netmap)) {
            if (cfg.mode == MeterMode::VoltsDc) {
                through(std::string(kJackVOhm), std::string(kJackCom), 1.0 / kVoltmeterResistance);
            } else if (cfg.mode == MeterMode::AmpsDc) {
                i[std::string(kJackAmp)] = branch();
                i[std::string(kJackCom)] = -branch();
            } else if (cfg.mode == MeterMode::Ohms) {
                i[std::string(kJackCom)] = kOhmmeterCurrent;
                i[std::string(kJackVOhm)] = -kOhmmeterCurrent;
            }
        }
    }

    if (k == "nand_gate") {
        const double g_in = 1.0 / comp.number("input_resistance", 10e6);
        through("A_in", "VSS", g_in);
        through("B_in", "VSS", g_in);
    }
    if (auto model = nonlinear_model(comp)) {
        const auto pins = nonlinear_pins(*model);
        std::vector<double> pv;
        for (const auto& p : pins) pv.push_back(v[p]);
        const auto ev = evaluate(*model, pv);
        for (std::size_t p = 0; p < pins.size(); ++p) i[pins[p]] += ev.currents[static_cast<Eigen::Index>(p)];
    }

    for (const auto& [pin, cur] : i) st.power += v[pin] * cur;
    return st;
}

}  // namespace

Solution solve_op(const Sketch& sketch, const NetMap& netmap, const SolveOptions& opts) {
    const Circuit circuit = compile(sketch, netmap);
    const NewtonSolver newton(circuit, netmap, opts);

    int total_iterations = 0;
    double last_residual = 0.0;
    std::optional<Strategy> strategy;
    NewtonState state = newton.initial_state();

    auto attempt = [&](NewtonState& s, double gmin, double scale) {
        const auto outcome = newton.run(s, gmin, scale);
        total_iterations += outcome.iterations;
        last_residual = outcome.residual;
        return outcome.converged;
    };

    if (attempt(state, opts.gmin, 1.0)) {
        strategy = Strategy::Direct;
    }
    if (!strategy && opts.gmin_steps > 0) {
        state = newton.initial_state();
        bool ok = true;
        for (int k = 0; k <= opts.gmin_steps && ok; ++k) {
            const double g = kGminStart * std::pow(opts.gmin / kGminStart, static_cast<double>(k) / opts.gmin_steps);
            ok = attempt(state, g, 1.0);
        }
        if (ok) strategy = Strategy::GminStepping;
    }
    if (!strategy && opts.source_steps > 0) {
        state = newton.initial_state();
        bool ok = true;
        for (int k = 1; k <= opts.source_steps && ok; ++k) {
            ok = attempt(state, opts.gmin, static_cast<double>(k) / opts.source_steps);
        }
        if (ok) strategy = Strategy::SourceStepping;
    }
    if (!strategy) throw NoConvergence(last_residual, total_iterations);

    Solution sol;
    sol.converged = true;
    sol.iterations = total_iterations;
    sol.strategy = *strategy;
    sol.gmin = opts.gmin;
    sol.residual_norm = last_residual;
    for (const auto& net : netmap.nets) {
        sol.node_voltages[net.id] = net.is_ground ? 0.0 : node_voltage(circuit.layout, state.x, net.id);
    }
    for (std::size_t b = 0; b < circuit.layout.branches.size(); ++b) {
        sol.branch_currents[circuit.layout.branches[b]] = state.x[circuit.layout.n_nodes() + static_cast<Eigen::Index>(b)];
    }
    for (const auto* comp : circuit.components) {
        sol.element_states[comp->id] = element_state(*comp, netmap, circuit, state.x, sol.branch_currents);
    }
    return sol;
}

}  // namespace circsim
