#pragma once

// Handheld multimeter: jack/mode checks, the burden it places on the circuit,
// and what its screen shows.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "circsim/dc_solver.hpp"
#include "circsim/devices.hpp"
#include "circsim/nets.hpp"
#include "circsim/sketch.hpp"

namespace circsim {

inline constexpr double kVoltmeterResistance = 10e6;  // Ω
inline constexpr double kOhmmeterCurrent = 1e-3;      // A
inline constexpr double kOhmmeterOverload = 40e6;     // Ω

inline constexpr std::string_view kJackCom = "COM";
inline constexpr std::string_view kJackVOhm = "VΩ";
inline constexpr std::string_view kJackAmp = "A";

enum class MeterMode { VoltsDc, VoltsAc, AmpsDc, AmpsAc, Ohms };

[[nodiscard]] std::string_view to_string(MeterMode mode) noexcept;
[[nodiscard]] std::optional<MeterMode> parse_meter_mode(std::string_view text) noexcept;

enum class ReadingStatus { Ok, Err, OverLimit, Unsupported };

[[nodiscard]] std::string_view to_string(ReadingStatus status) noexcept;

struct MultimeterConfig {
    std::string component_id;
    MeterMode mode = MeterMode::VoltsDc;
};

/// Throws Error(NotSimulatable) if `instance` is not a multimeter.
[[nodiscard]] MultimeterConfig meter_config(const ComponentInstance& instance);

struct Reading {
    std::string meter_id;
    ReadingStatus status = ReadingStatus::Ok;
    std::optional<double> value;  // V, A or Ω; present iff status is Ok
    std::string display;

    bool operator==(const Reading&) const = default;
};

/// A jack counts as wired when its net holds any other terminal.
[[nodiscard]] bool jack_wired(const MultimeterConfig& cfg, const NetMap& netmap, std::string_view jack);

/// True iff every wired jack is legal for the mode: COM and VΩ for voltage
/// and resistance, COM and A for current.
[[nodiscard]] bool validate_probes(const MultimeterConfig& cfg, const NetMap& netmap);

/// What the meter adds to the circuit: 10 MΩ across VΩ-COM (V_DC), a 0 V
/// ammeter branch from A to COM (A_DC), or a 1 mA test current out of VΩ
/// returning at COM (OHM). AC modes and invalid probe setups add nothing.
[[nodiscard]] std::vector<LinearStamp> internal_model(const MultimeterConfig& cfg, StampContext& ctx);

[[nodiscard]] Reading compute_reading(const MultimeterConfig& cfg, const NetMap& netmap, const Solution& solution);

/// Meter screen text: four significant digits with an SI prefix (µ m k M),
/// rounded half away from zero, e.g. "17.93mV", "500.0Ω". "ERR", "OL" and
/// "---" for the non-OK statuses.
[[nodiscard]] std::string format_display(ReadingStatus status, double value, MeterMode mode);

/// Same numeric format for an arbitrary unit.
[[nodiscard]] std::string format_si(double value, std::string_view unit);

[[nodiscard]] std::string_view unit_of(MeterMode mode) noexcept;

}  // namespace circsim
