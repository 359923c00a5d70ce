#include "circsim/failures.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "circsim/devices.hpp"

namespace circsim {

std::string_view to_string(FailureKind kind) noexcept {
    switch (kind) {
        case FailureKind::ShortCircuit: return "SHORT_CIRCUIT";
        case FailureKind::MaxCurrent: return "MAX_CURRENT";
        case FailureKind::MaxPower: return "MAX_POWER";
        case FailureKind::ReverseVoltage: return "REVERSE_VOLTAGE";
        case FailureKind::MaxVoltage: return "MAX_VOLTAGE";
    }
    return "";
}

namespace {

bool is_capacitor(std::string_view kind) {
    return kind == "ceramic_capacitor" || kind == "electrolytic_capacitor" || kind == "tantalum_capacitor";
}

class Checker {
public:
    Checker(const ComponentInstance& comp, const ElementState& state, std::vector<SmokeEvent>& out)
        : comp_(comp), st_(state), limits_(limits_for(comp)), out_(out) {}

    void run() {
        const std::string& k = comp_.kind;
        if (k == "battery" || k == "dc_supply") {
            over(FailureKind::ShortCircuit, std::abs(current("+")), limits_.max_current, "A");
        } else if (k == "diode" || k == "led") {
            over(FailureKind::MaxCurrent, std::abs(current("anode")), limits_.max_current, "A");
        } else if (k == "inductor") {
            over(FailureKind::MaxCurrent, std::abs(current("1")), limits_.max_current, "A");
        } else if (k == "nand_gate" || k == "ir_sensor") {
            over(FailureKind::MaxCurrent, std::abs(current("OUT")), limits_.max_current, "A", "OUT");
        } else if (k == "resistor") {
            const double r = comp_.number("resistance", 1000.0);
            over(FailureKind::MaxPower, square(across("1", "2")) / r, limits_.max_power, "W");
        } else if (k == "potentiometer") {
            const auto [ra, rb] = potentiometer_split(comp_.number("max_resistance", 10000.0), comp_.number("position", 0.5));
            over(FailureKind::MaxPower, square(across("1", "wiper")) / ra, limits_.max_power, "W", "1");
            over(FailureKind::MaxPower, square(across("wiper", "2")) / rb, limits_.max_power, "W", "2");
        }

        if (is_capacitor(k)) {
            const bool polar = limits_.polarized;
            const double v = polar ? across("+", "-") : across("1", "2");
            reverse(v);
            over(FailureKind::MaxVoltage, std::abs(v), limits_.max_voltage, "V");
        } else if (k == "dc_motor") {
            over(FailureKind::MaxVoltage, std::abs(across("1", "2")), limits_.max_voltage, "V");
        } else if (k == "ir_sensor") {
            const double v = across("VCC", "GND");
            reverse(v);
            over(FailureKind::MaxVoltage, std::abs(v), limits_.max_voltage, "V");
        }
    }

private:
    static double square(double x) { return x * x; }

    double current(const std::string& pin) const { return st_.pin_currents.at(pin); }
    double across(const std::string& a, const std::string& b) const {
        return st_.pin_voltages.at(a) - st_.pin_voltages.at(b);
    }

    void over(FailureKind kind, double measured, const std::optional<double>& limit, const char* unit,
              std::optional<std::string> pin = std::nullopt) {
        if (limit && measured > *limit) out_.push_back({comp_.id, kind, measured, *limit, unit, std::move(pin)});
    }

    void reverse(double v) {
        if (limits_.polarized && v < -limits_.max_reverse_voltage) {
            out_.push_back({comp_.id, FailureKind::ReverseVoltage, v, -limits_.max_reverse_voltage, "V", std::nullopt});
        }
    }

    const ComponentInstance& comp_;
    const ElementState& st_;
    LimitSet limits_;
    std::vector<SmokeEvent>& out_;
};

}  // namespace

std::vector<SmokeEvent> check_failures(const Sketch& sketch, const Solution& solution) {
    std::vector<SmokeEvent> events;
    for (const auto& comp : sketch.components) {
        const auto it = solution.element_states.find(comp.id);
        if (it == solution.element_states.end() || it->second.excluded) continue;
        Checker(comp, it->second, events).run();
    }
    std::sort(events.begin(), events.end(), [](const SmokeEvent& a, const SmokeEvent& b) {
        return std::tie(a.component, a.kind, a.pin) < std::tie(b.component, b.kind, b.pin);
    });
    return events;
}

}  // namespace circsim
