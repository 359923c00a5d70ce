#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "circsim/dc_solver.hpp"
#include "circsim/nets.hpp"
#include "support/builder.hpp"
#include "support/oracles.hpp"
#include "support/random_circuits.hpp"

using namespace circsim;
using Catch::Approx;

namespace {

struct Solved {
    Sketch sketch;
    NetMap netmap;
    Solution solution;

    [[nodiscard]] double v(const std::string& comp, const std::string& pin) const { return solution.voltage(netmap, {comp, pin}); }
};

Solved solve(const Sketch& s, const SolveOptions& opts = {}) {
    REQUIRE(validate_sketch(s).empty());
    auto nm = extract_nets(s);
    auto sol = solve_op(s, nm, opts);
    return {s, std::move(nm), std::move(sol)};
}

// Max |sum of pin currents + gmin*V| over nets, and |sum of element power + gmin losses|.
std::pair<double, double> balance(const Solved& r) {
    std::map<int, double> kcl;
    double power = 0.0;
    for (const auto& [id, st] : r.solution.element_states) {
        power += st.power;
        for (const auto& [pin, cur] : st.pin_currents) kcl[r.netmap.net_id({id, pin})] += cur;
    }
    double worst = 0.0;
    for (const auto& net : r.netmap.nets) {
        if (net.is_ground) continue;
        const double v = r.solution.node_voltages.at(net.id);
        worst = std::max(worst, std::abs(kcl[net.id] + r.solution.gmin * v));
        power += r.solution.gmin * v * v;
    }
    return {worst, std::abs(power)};
}

void check_balance(const Solved& r) {
    const auto [kcl, power] = balance(r);
    CHECK(kcl <= 1e-9);
    CHECK(power <= 1e-6);
}

}  // namespace

TEST_CASE("divider operating point", "[solver]") {
    const auto r = solve(test::CircuitBuilder()
                             .battery("V1", "top", "0", 9.0)
                             .resistor("R1", "top", "mid", 1000.0)
                             .resistor("R2", "mid", "0", 2000.0)
                             .build());
    CHECK(r.v("R1", "2") == Approx(6.0).epsilon(1e-8));
    CHECK(r.v("R1", "1") == Approx(9.0).epsilon(1e-12));
    CHECK(r.solution.iterations == 1);
    CHECK(r.solution.strategy == Strategy::Direct);
    CHECK(r.solution.branch_currents.at("V1") == Approx(-3e-3).epsilon(1e-8));
    CHECK(r.solution.element_states.at("R2").power == Approx(0.018).epsilon(1e-8));
    check_balance(r);
}

TEST_CASE("series diode against bisection", "[solver]") {
    const auto r = solve(test::CircuitBuilder()
                             .battery("V1", "in", "0", 5.0)
                             .resistor("R1", "in", "a", 1000.0)
                             .add("D1", "diode", {{"anode", "a"}, {"cathode", "0"}})
                             .build());
    const double expected = oracle::series_diode_voltage(5.0, 1000.0, 1e-14, 1.0);
    CHECK(std::abs(r.v("D1", "anode") - expected) <= 1e-6);
    CHECK(r.solution.strategy == Strategy::Direct);
    CHECK(r.solution.iterations <= 15);
    check_balance(r);
}

TEST_CASE("LED forward voltage at 20 mA", "[solver]") {
    // n = 2, Is = 1e-18: about 1.94 V at 20 mA.
    const double vf = 2.0 * oracle::kVt * std::log(0.020 / 1e-18 + 1.0);
    CHECK(vf == Approx(1.94).margin(0.01));
    const double ohms = (5.0 - vf) / 0.020;
    const auto r = solve(test::CircuitBuilder()
                             .battery("V1", "in", "0", 5.0)
                             .resistor("R1", "in", "a", ohms)
                             .add("L1", "led", {{"anode", "a"}, {"cathode", "0"}})
                             .build());
    CHECK(r.solution.element_states.at("L1").pin_currents.at("anode") == Approx(0.020).epsilon(1e-6));
}

TEST_CASE("floating subcircuit is held by gmin", "[solver]") {
    const auto r = solve(test::CircuitBuilder()
                             .battery("V1", "in", "0", 5.0)
                             .resistor("R1", "in", "0", 100.0)
                             .resistor("R9", "x", "y", 1000.0)
                             .build());
    CHECK(r.solution.iterations == 1);
    CHECK(r.v("R9", "1") == Approx(0.0).margin(1e-12));
}

TEST_CASE("voltage source loop is singular", "[solver]") {
    const auto s = test::CircuitBuilder().battery("V1", "a", "0", 5.0).battery("V2", "a", "0", 3.0).build();
    const auto nm = extract_nets(s);
    CHECK_THROWS_AS(solve_op(s, nm), SingularCircuit);
    try {
        (void)solve_op(s, nm);
    } catch (const SingularCircuit& e) {
        CHECK_FALSE(e.where().empty());
        CHECK(e.code() == ErrorCode::Singular);
    }
}

TEST_CASE("excluded parts are carried, not solved", "[solver]") {
    auto s = test::CircuitBuilder()
                 .battery("V1", "a", "0", 5.0)
                 .resistor("R1", "a", "0", 100.0)
                 .add("U9", "arduino_uno", {{"5V", "a"}})
                 .build();
    const auto r = solve(s);
    CHECK(r.solution.element_states.at("U9").excluded);
    CHECK(r.v("R1", "1") == Approx(5.0));
}

TEST_CASE("fallback strategies", "[solver]") {
    const auto s = test::CircuitBuilder()
                       .battery("V1", "in", "0", 5.0)
                       .resistor("R1", "in", "a", 1000.0)
                       .add("D1", "diode", {{"anode", "a"}, {"cathode", "0"}})
                       .build();
    const auto direct = solve(s);
    CHECK(direct.solution.strategy == Strategy::Direct);

    SECTION("gmin stepping") {
        SolveOptions opts;
        opts.max_newton_iters = 8;
        const auto r = solve(s, opts);
        CHECK(r.solution.strategy == Strategy::GminStepping);
        CHECK(r.v("D1", "anode") == Approx(direct.v("D1", "anode")).epsilon(1e-6));
    }
    SECTION("source stepping") {
        SolveOptions opts;
        opts.max_newton_iters = 5;
        opts.gmin_steps = 0;
        opts.source_steps = 50;
        const auto r = solve(s, opts);
        CHECK(r.solution.strategy == Strategy::SourceStepping);
        CHECK(r.v("D1", "anode") == Approx(direct.v("D1", "anode")).epsilon(1e-6));
    }
    SECTION("no convergence") {
        SolveOptions opts;
        opts.max_newton_iters = 1;
        opts.gmin_steps = 0;
        opts.source_steps = 1;
        CHECK_THROWS_AS(solve(s, opts), NoConvergence);
    }
}

TEST_CASE("NAND truth table", "[solver]") {
    for (const auto& [a, b, high] : {std::tuple{0.0, 0.0, true}, std::tuple{0.0, 5.0, true}, std::tuple{5.0, 0.0, true},
                                     std::tuple{5.0, 5.0, false}}) {
        test::CircuitBuilder cb;
        cb.battery("VDD", "vdd", "0", 5.0)
            .add("U1", "nand_gate", {{"VDD", "vdd"}, {"VSS", "0"}, {"A_in", "a"}, {"B_in", "b"}, {"OUT", "out"}})
            .resistor("RL", "out", "0", 1e6);
        if (a > 0) cb.battery("VA", "a", "0", a);
        else cb.resistor("RA", "a", "0", 1.0);
        if (b > 0) cb.battery("VB", "b", "0", b);
        else cb.resistor("RB", "b", "0", 1.0);
        const auto r = solve(cb.build());
        INFO("inputs " << a << " " << b);
        if (high) CHECK(r.v("U1", "OUT") > 4.9);
        else CHECK(r.v("U1", "OUT") < 0.1);
        check_balance(r);
    }
}

TEST_CASE("BJT and NMOS bias points balance", "[solver]") {
    SECTION("common emitter") {
        const auto r = solve(test::CircuitBuilder()
                                 .battery("VCC", "vcc", "0", 9.0)
                                 .resistor("RB", "vcc", "b", 100e3)
                                 .resistor("RC", "vcc", "c", 1e3)
                                 .add("Q1", "bjt_npn", {{"collector", "c"}, {"base", "b"}, {"emitter", "0"}})
                                 .build());
        const auto& q = r.solution.element_states.at("Q1");
        const double ib = q.pin_currents.at("base");
        const double ic = q.pin_currents.at("collector");
        CHECK(ic / ib == Approx(100.0).epsilon(0.02));  // forward active
        check_balance(r);
    }
    SECTION("nmos in saturation") {
        const auto r = solve(test::CircuitBuilder()
                                 .battery("VDD", "vdd", "0", 10.0)
                                 .battery("VG", "g", "0", 3.0)
                                 .resistor("RD", "vdd", "d", 1e3)
                                 .add("M1", "nmos", {{"drain", "d"}, {"gate", "g"}, {"source", "0"}})
                                 .build());
        // Id = K/2 (3 - 1)^2 = 2 mA
        CHECK(r.solution.element_states.at("M1").pin_currents.at("drain") == Approx(2e-3).epsilon(1e-9));
        check_balance(r);
    }
}

TEST_CASE("random resistor networks match nodal analysis", "[solver][property]") {
    test::Rng rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        auto rn = test::random_resistor_network(rng);
        const auto r = solve(rn.sketch);
        rn.network.shunt = r.solution.gmin;
        const auto expected = oracle::nodal_solve(rn.network);
        CHECK(r.solution.iterations == 1);
        for (const auto& [node, t] : rn.probe) {
            const double got = r.solution.voltage(r.netmap, t);
            const double want = expected[static_cast<std::size_t>(node)];
            INFO("trial " << trial << " node " << node);
            CHECK(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
        }
        check_balance(r);
    }
}

TEST_CASE("KCL and power balance on random diode circuits", "[solver][property]") {
    test::Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        auto rn = test::random_resistor_network(rng, 6);
        auto& s = rn.sketch;
        const int diodes = test::uniform_int(rng, 1, 3);
        for (int k = 0; k < diodes; ++k) {
            auto it = rn.probe.begin();
            std::advance(it, test::uniform_int(rng, 0, static_cast<int>(rn.probe.size()) - 1));
            auto jt = rn.probe.begin();
            std::advance(jt, test::uniform_int(rng, 0, static_cast<int>(rn.probe.size()) - 1));
            if (it == jt) continue;
            s.components.push_back({"D" + std::to_string(k), test::uniform_int(rng, 0, 1) ? "diode" : "led", {},
                                    {{"anode", DirectTerminal{it->second}}, {"cathode", DirectTerminal{jt->second}}}});
        }
        const auto r = solve(s);
        INFO("trial " << trial);
        CHECK(r.solution.converged);
        check_balance(r);
    }
}
