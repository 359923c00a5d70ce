#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "circsim/instruments.hpp"
#include "circsim/sketch_io.hpp"
#include "support/builder.hpp"
#include "support/random_circuits.hpp"

using namespace circsim;
using Catch::Approx;

namespace {

Reading meter_reading(const Sketch& s, const std::string& meter = "M1") {
    const auto result = simulate(s);
    REQUIRE(result.report.diagnostics.empty());
    REQUIRE_FALSE(result.report.error);
    for (const auto& r : result.report.readings) {
        if (r.meter_id == meter) return r;
    }
    FAIL("no reading for " << meter);
    return {};
}

// Screen text back to a number: strips the unit and applies the prefix.
double parse_display(std::string text, const std::string& unit) {
    REQUIRE(text.size() > unit.size());
    REQUIRE(text.substr(text.size() - unit.size()) == unit);
    text.resize(text.size() - unit.size());
    double scale = 1.0;
    const std::pair<const char*, double> prefixes[]{{"M", 1e6}, {"k", 1e3}, {"m", 1e-3}, {"µ", 1e-6}};
    for (const auto& [p, s] : prefixes) {
        const std::string ps(p);
        if (text.size() >= ps.size() && text.substr(text.size() - ps.size()) == ps) {
            text.resize(text.size() - ps.size());
            scale = s;
            break;
        }
    }
    return std::stod(text) * scale;
}

std::size_t significant_digits(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += (c >= '0' && c <= '9');
    return n;
}

}  // namespace

TEST_CASE("meter modes", "[instruments]") {
    for (const auto* name : {"V_DC", "V_AC", "A_DC", "A_AC", "OHM"}) {
        const auto m = parse_meter_mode(name);
        REQUIRE(m);
        CHECK(to_string(*m) == name);
    }
    CHECK_FALSE(parse_meter_mode("volts"));
    CHECK(unit_of(MeterMode::Ohms) == "Ω");
    CHECK(meter_config(ComponentInstance{"M1", "multimeter", {}, {}}).mode == MeterMode::VoltsDc);
    CHECK_THROWS_AS(meter_config(ComponentInstance{"R1", "resistor", {}, {}}), Error);
}

TEST_CASE("display formatting", "[instruments]") {
    CHECK(format_si(17.93e-3, "V") == "17.93mV");
    CHECK(format_si(500.0, "Ω") == "500.0Ω");
    CHECK(format_si(6.0, "V") == "6.000V");
    CHECK(format_si(0.0, "V") == "0.000V");
    CHECK(format_si(-6.0, "V") == "-6.000V");
    CHECK(format_si(3.0, "A") == "3.000A");
    CHECK(format_si(220.0, "Ω") == "220.0Ω");
    CHECK(format_si(1234.5, "Ω") == "1.235kΩ");
    CHECK(format_si(-0.0005, "V") == "-500.0µV");
    CHECK(format_si(9.9995, "V") == "10.00V");
    CHECK(format_si(999.95, "Ω") == "1.000kΩ");
    CHECK(format_si(12e6, "Ω") == "12.00MΩ");
    CHECK(format_si(0.0012345, "A") == "1.235mA");
    CHECK(format_si(1e-9, "V") == "0.001µV");
    CHECK(format_si(4e-10, "V") == "0.000µV");
    CHECK(format_si(-4e-10, "V") == "0.000µV");
    CHECK(format_si(9.9996e-7, "V") == "1.000µV");
    CHECK(format_display(ReadingStatus::Err, 0.0, MeterMode::Ohms) == "ERR");
    CHECK(format_display(ReadingStatus::OverLimit, 0.0, MeterMode::Ohms) == "OL");
    CHECK(format_display(ReadingStatus::Unsupported, 0.0, MeterMode::VoltsAc) == "---");
    CHECK(format_display(ReadingStatus::Ok, 6.0, MeterMode::VoltsDc) == "6.000V");
}

TEST_CASE("display round-trips within half a count", "[instruments][property]") {
    test::Rng rng(123);
    for (int i = 0; i < 5000; ++i) {
        const double mag = test::log_uniform(rng, 1e-6, 9e8);
        const double value = test::uniform_int(rng, 0, 1) ? mag : -mag;
        const auto text = format_si(value, "V");
        const double back = parse_display(text, "V");
        const double step = std::pow(10.0, std::floor(std::log10(mag)) - 3.0);
        INFO(value << " -> " << text);
        CHECK(std::abs(back - value) <= 0.5 * step * (1 + 1e-9) + 1e-15 * mag);
        if (mag < 999.9e6) CHECK(significant_digits(text) == 4);
    }
    for (int i = 0; i < 1000; ++i) {
        const double value = test::uniform_real(rng, -1e-6, 1e-6);
        const auto text = format_si(value, "A");
        CHECK(std::abs(parse_display(text, "A") - value) <= 0.5e-9 * (1 + 1e-9));
    }
}

TEST_CASE("ohmmeter across an unpowered resistor", "[instruments]") {
    const auto r = meter_reading(test::CircuitBuilder()
                                     .resistor("R1", "a", "b", 220.0)
                                     .meter("M1", "OHM", {{"VΩ", "a"}, {"COM", "b"}})
                                     .build());
    CHECK(r.status == ReadingStatus::Ok);
    CHECK(r.display == "220.0Ω");
    CHECK(*r.value == Approx(220.0).epsilon(1e-6));
}

TEST_CASE("ohmmeter over range and open probes", "[instruments]") {
    const auto big = meter_reading(test::CircuitBuilder()
                                       .resistor("R1", "a", "b", 100e6)
                                       .meter("M1", "OHM", {{"VΩ", "a"}, {"COM", "b"}})
                                       .build());
    CHECK(big.status == ReadingStatus::OverLimit);
    CHECK(big.display == "OL");

    auto s = test::CircuitBuilder().resistor("R1", "a", "b", 100.0).build();
    s.components.push_back({"M1", "multimeter", {{"mode", std::string("OHM")}}, {{"COM", DirectTerminal{{"R1", "1"}}}}});
    const auto open = meter_reading(s);
    CHECK(open.display == "OL");
}

TEST_CASE("voltmeter is signed", "[instruments]") {
    auto build = [](bool swapped) {
        return test::CircuitBuilder()
            .battery("V1", "top", "0", 9.0)
            .resistor("R1", "top", "mid", 1000.0)
            .resistor("R2", "mid", "0", 2000.0)
            .meter("M1", "V_DC", {{swapped ? "COM" : "VΩ", "mid"}, {swapped ? "VΩ" : "COM", "0"}})
            .build();
    };
    const auto fwd = meter_reading(build(false));
    const auto rev = meter_reading(build(true));
    CHECK(fwd.display == "6.000V");
    CHECK(rev.display == "-6.000V");
    CHECK(*rev.value == -*fwd.value);
    // 10 MΩ burden on the 667 Ω Thevenin source.
    const double rth = 1000.0 * 2000.0 / 3000.0;
    CHECK(*fwd.value == Approx(6.0 * 10e6 / (10e6 + rth)).epsilon(1e-9));
    CHECK(std::abs(*fwd.value - 6.0) / 6.0 <= 2e-4);
}

TEST_CASE("ammeter in a series loop", "[instruments]") {
    const auto r = meter_reading(test::CircuitBuilder()
                                     .battery("V1", "p", "0", 9.0)
                                     .resistor("R1", "p", "x", 3.0)
                                     .meter("M1", "A_DC", {{"A", "x"}, {"COM", "0"}})
                                     .build());
    CHECK(r.display == "3.000A");
    CHECK(*r.value == Approx(3.0).epsilon(1e-9));
}

TEST_CASE("wrong jack gives ERR", "[instruments]") {
    SECTION("ohms with the A jack wired") {
        const auto r = meter_reading(test::CircuitBuilder()
                                         .resistor("R1", "a", "b", 220.0)
                                         .meter("M1", "OHM", {{"VΩ", "a"}, {"A", "b"}})
                                         .build());
        CHECK(r.status == ReadingStatus::Err);
        CHECK(r.display == "ERR");
        CHECK_FALSE(r.value);
    }
    SECTION("amps with the VΩ jack wired") {
        const auto r = meter_reading(test::CircuitBuilder()
                                         .battery("V1", "p", "0", 9.0)
                                         .resistor("R1", "p", "x", 3.0)
                                         .meter("M1", "A_DC", {{"VΩ", "x"}, {"COM", "0"}})
                                         .build());
        CHECK(r.display == "ERR");
    }
    SECTION("volts with the A jack wired") {
        const auto r = meter_reading(test::CircuitBuilder()
                                         .battery("V1", "p", "0", 9.0)
                                         .resistor("R1", "p", "0", 3.0)
                                         .meter("M1", "V_DC", {{"A", "p"}, {"COM", "0"}})
                                         .build());
        CHECK(r.display == "ERR");
    }
}

TEST_CASE("AC modes are unsupported", "[instruments]") {
    const auto r = meter_reading(test::CircuitBuilder()
                                     .battery("V1", "p", "0", 9.0)
                                     .resistor("R1", "p", "0", 3.0)
                                     .meter("M1", "V_AC", {{"VΩ", "p"}, {"COM", "0"}})
                                     .build());
    CHECK(r.status == ReadingStatus::Unsupported);
    CHECK(r.display == "---");
}

TEST_CASE("internal models", "[instruments]") {
    const auto s = test::CircuitBuilder()
                       .resistor("R1", "a", "b", 1.0)
                       .meter("MV", "V_DC", {{"VΩ", "a"}, {"COM", "b"}})
                       .meter("MA", "A_DC", {{"A", "a"}, {"COM", "b"}})
                       .meter("MO", "OHM", {{"VΩ", "a"}, {"COM", "b"}})
                       .meter("MX", "V_AC", {{"VΩ", "a"}, {"COM", "b"}})
                       .build();
    const auto nm = extract_nets(s);
    StampContext ctx(nm);
    const NodeId a = ctx.node({"R1", "1"});
    const NodeId b = ctx.node({"R1", "2"});
    auto model = [&](const char* id) { return internal_model(meter_config(*s.find_component(id)), ctx); };
    CHECK(model("MV") == std::vector<LinearStamp>{Conductance{a, b, 1.0 / kVoltmeterResistance}});
    CHECK(model("MA") == std::vector<LinearStamp>{VoltageSourceBranch{a, b, 0.0, "MA"}});
    CHECK(model("MO") == std::vector<LinearStamp>{CurrentSource{b, a, kOhmmeterCurrent}});
    CHECK(model("MX").empty());
}
