#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "circsim/devices.hpp"
#include "circsim/error.hpp"
#include "circsim/nets.hpp"
#include "support/builder.hpp"
#include "support/oracles.hpp"
#include "support/random_circuits.hpp"

using namespace circsim;

namespace {

std::map<std::string, std::vector<std::string>> pin_table() {
    std::map<std::string, std::vector<std::string>> pins;
    for (const auto* kind : {"resistor", "battery", "led", "ground", "multimeter"}) pins[kind] = registry_lookup(kind).pins;
    return pins;
}

std::set<std::set<Terminal>> partition(const NetMap& nm) {
    std::set<std::set<Terminal>> out;
    for (const auto& n : nm.nets) out.insert(n.terminals);
    return out;
}

Sketch one_resistor_on(Location a, Location b) {
    Sketch s;
    s.breadboards.push_back({"BB1", 63});
    ComponentInstance r{"R1", "resistor", {}, {{"1", a}, {"2", b}}};
    s.components.push_back(r);
    return s;
}

bool has_code(const std::vector<Diagnostic>& ds, DiagnosticCode code, const std::string& subject) {
    return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) { return d.code == code && d.subject == subject; });
}

}  // namespace

TEST_CASE("empty sketch is valid", "[sketch]") {
    CHECK(validate_sketch(Sketch{}).empty());
    CHECK(extract_nets(Sketch{}).nets.empty());
}

TEST_CASE("validation diagnostics", "[sketch]") {
    SECTION("duplicate component id") {
        auto s = one_resistor_on(BreadboardHole{"BB1", 1, 'a'}, BreadboardHole{"BB1", 2, 'a'});
        auto dup = s.components[0];
        dup.placements = {{"1", BreadboardHole{"BB1", 3, 'a'}}, {"2", BreadboardHole{"BB1", 4, 'a'}}};
        s.components.push_back(dup);
        const auto ds = validate_sketch(s);
        REQUIRE(ds.size() == 1);
        CHECK(ds[0].code == DiagnosticCode::DupId);
        CHECK(ds[0].subject == "R1");
    }
    SECTION("negative resistance") {
        auto s = one_resistor_on(BreadboardHole{"BB1", 1, 'a'}, BreadboardHole{"BB1", 2, 'a'});
        s.components[0].properties["resistance"] = -5.0;
        const auto ds = validate_sketch(s);
        REQUIRE(ds.size() == 1);
        CHECK(ds[0].code == DiagnosticCode::BadProperty);
        CHECK(ds[0].detail == "resistance");
    }
    SECTION("undeclared property") {
        auto s = one_resistor_on(BreadboardHole{"BB1", 1, 'a'}, BreadboardHole{"BB1", 2, 'a'});
        s.components[0].properties["colour"] = std::string("brown");
        CHECK(has_code(validate_sketch(s), DiagnosticCode::BadProperty, "R1"));
    }
    SECTION("two pins in one hole") {
        auto s = one_resistor_on(BreadboardHole{"BB1", 1, 'a'}, BreadboardHole{"BB1", 1, 'a'});
        CHECK(has_code(validate_sketch(s), DiagnosticCode::HoleConflict, "R1"));
    }
    SECTION("hole off the board") {
        auto s = one_resistor_on(BreadboardHole{"BB1", 64, 'a'}, BreadboardHole{"BB1", 1, 'a'});
        CHECK(has_code(validate_sketch(s), DiagnosticCode::DanglingRef, "R1"));
        auto rail = one_resistor_on(RailHole{"BB1", Rail::TopPlus, 51}, BreadboardHole{"BB1", 1, 'a'});
        CHECK(has_code(validate_sketch(rail), DiagnosticCode::DanglingRef, "R1"));
    }
    SECTION("unknown board") {
        auto s = one_resistor_on(BreadboardHole{"BB9", 1, 'a'}, BreadboardHole{"BB1", 1, 'b'});
        CHECK(has_code(validate_sketch(s), DiagnosticCode::DanglingRef, "R1"));
    }
    SECTION("missing and unknown pins") {
        Sketch s;
        s.breadboards.push_back({"BB1", 63});
        s.components.push_back({"R1", "resistor", {}, {{"1", BreadboardHole{"BB1", 1, 'a'}}, {"3", BreadboardHole{"BB1", 2, 'a'}}}});
        const auto ds = validate_sketch(s);
        CHECK(ds.size() == 2);
        CHECK(has_code(ds, DiagnosticCode::BadPin, "R1"));
    }
    SECTION("wire to a missing component") {
        auto s = one_resistor_on(BreadboardHole{"BB1", 1, 'a'}, BreadboardHole{"BB1", 2, 'a'});
        s.wires.push_back({"W1", BreadboardHole{"BB1", 1, 'b'}, DirectTerminal{{"R7", "1"}}});
        CHECK(has_code(validate_sketch(s), DiagnosticCode::DanglingRef, "W1"));
    }
    SECTION("wire from a hole to itself") {
        auto s = one_resistor_on(BreadboardHole{"BB1", 1, 'a'}, BreadboardHole{"BB1", 2, 'a'});
        s.wires.push_back({"W1", BreadboardHole{"BB1", 5, 'b'}, BreadboardHole{"BB1", 5, 'b'}});
        CHECK(has_code(validate_sketch(s), DiagnosticCode::HoleConflict, "W1"));
    }
    SECTION("meter jacks may stay unplugged") {
        auto s = one_resistor_on(BreadboardHole{"BB1", 1, 'a'}, BreadboardHole{"BB1", 2, 'a'});
        s.components.push_back({"M1", "multimeter", {{"mode", std::string("OHM")}}, {{"COM", BreadboardHole{"BB1", 1, 'b'}}}});
        CHECK(validate_sketch(s).empty());
    }
    SECTION("unknown kinds are carried") {
        auto s = one_resistor_on(BreadboardHole{"BB1", 1, 'a'}, BreadboardHole{"BB1", 2, 'a'});
        s.components.push_back({"X1", "flux_capacitor", {{"gigawatts", 1.21}}, {{"p", BreadboardHole{"BB1", 9, 'a'}}}});
        CHECK(validate_sketch(s).empty());
    }
}

TEST_CASE("breadboard tie points", "[nets]") {
    // battery + at (5,a), resistor pin 1 at (5,c)
    Sketch s;
    s.breadboards.push_back({"BB1", 63});
    s.components.push_back({"B1", "battery", {}, {{"+", BreadboardHole{"BB1", 5, 'a'}}, {"-", BreadboardHole{"BB1", 9, 'a'}}}});
    s.components.push_back({"R1", "resistor", {}, {{"1", BreadboardHole{"BB1", 5, 'c'}}, {"2", BreadboardHole{"BB1", 5, 'f'}}}});
    s.components.push_back({"R2", "resistor", {}, {{"1", RailHole{"BB1", Rail::TopMinus, 1}}, {"2", RailHole{"BB1", Rail::TopPlus, 1}}}});
    s.components.push_back({"R3", "resistor", {}, {{"1", RailHole{"BB1", Rail::TopMinus, 50}}, {"2", RailHole{"BB1", Rail::BottomMinus, 1}}}});
    REQUIRE(validate_sketch(s).empty());
    const auto nm = extract_nets(s);

    CHECK(nm.net_id({"B1", "+"}) == nm.net_id({"R1", "1"}));
    CHECK(nm.net_id({"R1", "1"}) != nm.net_id({"R1", "2"}));  // a-e and f-j are separate
    CHECK(nm.net_id({"R2", "1"}) == nm.net_id({"R3", "1"}));  // rails run end to end
    CHECK(nm.net_id({"R2", "1"}) != nm.net_id({"R2", "2"}));
    CHECK(nm.net_id({"R3", "1"}) != nm.net_id({"R3", "2"}));
}

TEST_CASE("no connectivity gives singleton nets", "[nets]") {
    Sketch s;
    s.breadboards.push_back({"BB1", 63});
    s.components.push_back({"R1", "resistor", {}, {{"1", BreadboardHole{"BB1", 1, 'a'}}, {"2", BreadboardHole{"BB1", 2, 'a'}}}});
    s.components.push_back({"R2", "resistor", {}, {{"1", BreadboardHole{"BB1", 3, 'a'}}, {"2", BreadboardHole{"BB1", 4, 'a'}}}});
    const auto nm = extract_nets(s);
    REQUIRE(nm.nets.size() == 4);
    for (const auto& n : nm.nets) CHECK(n.terminals.size() == 1);
    CHECK(net_of_terminal(nm, {"R1", "1"}) == std::set<Terminal>{{"R1", "1"}});
}

TEST_CASE("wires chain transitively", "[nets]") {
    Sketch s;
    s.breadboards.push_back({"BB1", 63});
    s.components.push_back({"R1", "resistor", {}, {{"1", BreadboardHole{"BB1", 1, 'a'}}, {"2", BreadboardHole{"BB1", 2, 'a'}}}});
    s.components.push_back({"R2", "resistor", {}, {{"1", BreadboardHole{"BB1", 30, 'a'}}, {"2", BreadboardHole{"BB1", 31, 'a'}}}});
    s.wires.push_back({"W1", BreadboardHole{"BB1", 2, 'b'}, BreadboardHole{"BB1", 10, 'g'}});
    s.wires.push_back({"W2", BreadboardHole{"BB1", 10, 'j'}, BreadboardHole{"BB1", 30, 'e'}});
    const auto nm = extract_nets(s);
    CHECK(nm.net_id({"R1", "2"}) == nm.net_id({"R2", "1"}));
    CHECK(nm.nets.size() == 3);
}

TEST_CASE("divider midpoint highlight", "[nets]") {
    const auto s = test::CircuitBuilder("divider")
                       .battery("V1", "top", "0", 9.0)
                       .resistor("R1", "top", "mid", 1000.0)
                       .resistor("R2", "mid", "0", 2000.0)
                       .meter("M1", "V_DC", {{"VΩ", "mid"}, {"COM", "0"}})
                       .build();
    const auto nm = extract_nets(s);
    CHECK(net_of_terminal(nm, {"R1", "2"}) == std::set<Terminal>{{"R1", "2"}, {"R2", "1"}, {"M1", "VΩ"}});
    CHECK_THROWS_MATCHES(net_of_terminal(nm, {"R9", "1"}), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == ErrorCode::UnknownTerminal; }));
}

TEST_CASE("ground markers merge into one reference net", "[nets]") {
    Sketch s;
    s.breadboards.push_back({"BB1", 63});
    s.components.push_back({"G1", "ground", {}, {{"GND", BreadboardHole{"BB1", 1, 'a'}}}});
    s.components.push_back({"G2", "ground", {}, {{"GND", BreadboardHole{"BB1", 40, 'a'}}}});
    const auto nm = extract_nets(s);
    REQUIRE(nm.nets.size() == 1);
    CHECK(nm.nets[0].is_ground);
    CHECK(nm.ground_net() == 1);
}

TEST_CASE("net numbering keys on the smallest member", "[nets]") {
    Sketch s;
    s.breadboards.push_back({"BB1", 63});
    s.components.push_back({"Z", "resistor", {}, {{"1", BreadboardHole{"BB1", 1, 'a'}}, {"2", BreadboardHole{"BB1", 2, 'a'}}}});
    s.components.push_back({"A", "resistor", {}, {{"1", BreadboardHole{"BB1", 2, 'b'}}, {"2", BreadboardHole{"BB1", 3, 'a'}}}});
    const auto nm = extract_nets(s);
    CHECK(nm.net_id({"A", "1"}) == 1);
    CHECK(nm.net_id({"A", "2"}) == 2);
    CHECK(nm.net_id({"Z", "1"}) == 3);
    for (std::size_t i = 0; i < nm.nets.size(); ++i) CHECK(nm.nets[i].id == static_cast<int>(i) + 1);
}

TEST_CASE("net extraction matches brute-force reachability", "[nets][property]") {
    const auto pins = pin_table();
    test::Rng rng(20261015);
    for (int trial = 0; trial < 300; ++trial) {
        const auto s = test::random_breadboard_sketch(rng, test::uniform_int(rng, 1, 12), test::uniform_int(rng, 0, 12));
        REQUIRE(validate_sketch(s).empty());
        const auto nm = extract_nets(s);
        const auto oracle = oracle::reachability(s, pins);
        CHECK(partition(nm) == std::set<std::set<Terminal>>(oracle.begin(), oracle.end()));

        // Equivalence relation: reflexive, symmetric, transitive.
        for (const auto& [t, id] : nm.terminal_index) {
            const auto mine = net_of_terminal(nm, t);
            CHECK(mine.contains(t));
            for (const auto& u : mine) CHECK(net_of_terminal(nm, u) == mine);
        }
        // At most one ground net.
        CHECK(std::count_if(nm.nets.begin(), nm.nets.end(), [](const Net& n) { return n.is_ground; }) <= 1);
    }
}

TEST_CASE("net extraction is invariant under permutation", "[nets][property]") {
    test::Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        auto s = test::random_breadboard_sketch(rng, 8, 8);
        const auto before = extract_nets(s);
        std::shuffle(s.components.begin(), s.components.end(), rng);
        std::shuffle(s.wires.begin(), s.wires.end(), rng);
        CHECK(extract_nets(s) == before);
    }
}

TEST_CASE("adding a wire only merges nets", "[nets][property]") {
    test::Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        auto s = test::random_breadboard_sketch(rng, 8, 4);
        const auto before = extract_nets(s);
        const auto a = test::random_hole(rng, "BB1", 12);
        const auto b = test::random_hole(rng, "BB1", 12);
        if (a == b) continue;
        s.wires.push_back({"Wextra", a, b});
        const auto after = extract_nets(s);
        CHECK(after.nets.size() <= before.nets.size());
        for (const auto& net : before.nets) {
            const auto t = *net.terminals.begin();
            CHECK(after.net(after.net_id(t)).terminals.size() >= net.terminals.size());
        }
    }
}
