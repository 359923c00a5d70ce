#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "circsim/dc_solver.hpp"
#include "circsim/sketch.hpp"

namespace circsim {

enum class FailureKind { ShortCircuit, MaxCurrent, MaxPower, ReverseVoltage, MaxVoltage };

[[nodiscard]] std::string_view to_string(FailureKind kind) noexcept;

/// A component operating outside its limits ("smoke").
struct SmokeEvent {
    std::string component;
    FailureKind kind = FailureKind::ShortCircuit;
    double measured = 0.0;
    double limit = 0.0;
    std::string unit;  // "A", "W" or "V"
    std::optional<std::string> pin;

    bool operator==(const SmokeEvent&) const = default;
};

/// Runs the five failure checks over a converged operating point. Events are
/// sorted by (component, kind, pin). Limits compare strictly:
///   SHORT_CIRCUIT   |source current| > max_current (battery, dc_supply)
///   MAX_CURRENT     |current| > max_current (diode, led, inductor, gate/sensor OUT pins)
///   MAX_POWER       V^2 G > max_power (resistor, each potentiometer half)
///   REVERSE_VOLTAGE V(+) - V(-) < -max_reverse_voltage (polarized caps, IR sensor supply)
///   MAX_VOLTAGE     |V| > max_voltage (capacitors, dc_motor, IR sensor supply)
[[nodiscard]] std::vector<SmokeEvent> check_failures(const Sketch& sketch, const Solution& solution);

}  // namespace circsim
