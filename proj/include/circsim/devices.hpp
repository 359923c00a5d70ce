#pragma once

// Device registry: pins, properties, DC models and failure limits for every
// supported component kind.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "circsim/nets.hpp"
#include "circsim/sketch.hpp"

namespace circsim {

inline constexpr double kThermalVoltage = 0.02585;  // V at ~27 C
inline constexpr double kSwitchOnResistance = 1e-3;  // Ω, closed switch contact

struct PropertySpec {
    std::string name;
    std::string unit;
    PropertyValue default_value;
    double min = 0.0;                  // numeric properties; inclusive
    double max = 0.0;
    bool min_exclusive = false;
    std::vector<std::string> choices;  // string properties

    [[nodiscard]] bool is_numeric() const noexcept { return std::holds_alternative<double>(default_value); }
    [[nodiscard]] bool accepts(const PropertyValue& value) const;
};

struct LimitSet {
    std::optional<double> max_current;  // A
    std::optional<double> max_power;    // W
    std::optional<double> max_voltage;  // V
    bool polarized = false;
    double max_reverse_voltage = 0.0;   // V, used when polarized

    bool operator==(const LimitSet&) const = default;
};

struct DeviceDescriptor {
    std::string kind;
    std::vector<std::string> pins;
    std::vector<PropertySpec> properties;
    bool simulatable = false;
    bool nonlinear = false;
    bool pins_optional = false;  // multimeter jacks may be left unplugged
    LimitSet limits;

    [[nodiscard]] const PropertySpec* property(std::string_view name) const noexcept;
    [[nodiscard]] bool has_pin(std::string_view pin) const noexcept;
    [[nodiscard]] bool known() const noexcept { return simulatable || !pins.empty(); }
};

/// Registry entry for `kind`. Unknown kinds yield a non-simulatable
/// descriptor with no pins.
[[nodiscard]] DeviceDescriptor registry_lookup(std::string_view kind);

/// Like registry_lookup, but unknown kinds take their pins from the
/// instance's placements so they can be carried and reported as excluded.
[[nodiscard]] DeviceDescriptor descriptor_for(const ComponentInstance& instance);

/// Every simulatable kind, sorted.
[[nodiscard]] std::vector<std::string> simulatable_kinds();

/// Descriptor limits with per-instance overrides applied.
[[nodiscard]] LimitSet limits_for(const ComponentInstance& instance);

/// Markdown table of every kind with pins, property defaults and limits.
[[nodiscard]] std::string device_reference_markdown();

// ---------------------------------------------------------------------------
// Linear stamps

/// MNA node; 0 is the reference node, nets keep their NetMap id, and
/// device-internal nodes are numbered after the last net.
using NodeId = int;

struct Conductance {
    NodeId a = 0;
    NodeId b = 0;
    double siemens = 0.0;

    bool operator==(const Conductance&) const = default;
};

/// Ideal source V(plus) - V(minus) = volts. The branch current flows into
/// `plus`, through the source, and out of `minus`.
struct VoltageSourceBranch {
    NodeId plus = 0;
    NodeId minus = 0;
    double volts = 0.0;
    std::string branch;

    bool operator==(const VoltageSourceBranch&) const = default;
};

/// Drives `amperes` out of node `from`, through the source, into node `to`.
struct CurrentSource {
    NodeId from = 0;
    NodeId to = 0;
    double amperes = 0.0;

    bool operator==(const CurrentSource&) const = default;
};

using LinearStamp = std::variant<Conductance, VoltageSourceBranch, CurrentSource>;

/// Maps terminals to MNA nodes and hands out device-internal nodes.
class StampContext {
public:
    explicit StampContext(const NetMap& netmap);

    /// 0 when the terminal sits on the ground net.
    [[nodiscard]] NodeId node(const Terminal& t) const;
    NodeId internal_node(std::string label);

    [[nodiscard]] const NetMap& netmap() const noexcept { return *netmap_; }
    [[nodiscard]] NodeId first_internal() const noexcept { return first_internal_; }
    [[nodiscard]] const std::vector<std::string>& internal_labels() const noexcept { return internal_labels_; }
    [[nodiscard]] int node_count() const noexcept {
        return first_internal_ - 1 + static_cast<int>(internal_labels_.size());
    }

private:
    const NetMap* netmap_;
    NodeId first_internal_;
    std::vector<std::string> internal_labels_;
};

/// Linear sub-elements of a simulatable instance. Nonlinear kinds return only
/// their linear parts (e.g. gate input resistances). Multimeters return
/// nothing here; their model belongs to the instruments module.
/// Throws Error(NotSimulatable).
[[nodiscard]] std::vector<LinearStamp> stamp_linear(const ComponentInstance& instance, StampContext& ctx);

// ---------------------------------------------------------------------------
// Nonlinear elements

struct DiodeModel {
    double saturation_current = 1e-14;
    double emission = 1.0;
};

/// Transport-form Ebers-Moll NPN.
struct BjtModel {
    double saturation_current = 1e-15;
    double beta_f = 100.0;
    double beta_r = 1.0;
};

/// Level-1 square law, Id = K/2 (Vgs - Vth)^2 in saturation.
struct NmosModel {
    double threshold = 1.0;
    double k = 1e-3;
};

/// Behavioral NAND output stage: source referenced to VSS with series resistance.
struct NandModel {
    double output_resistance = 200.0;
};

using NonlinearModel = std::variant<DiodeModel, BjtModel, NmosModel, NandModel>;

/// Result of evaluating one nonlinear element at candidate pin voltages.
/// Pin order is that of nonlinear_pins().
struct NonlinearEval {
    Eigen::VectorXd currents;        // into each pin at eval_voltages
    Eigen::MatrixXd jacobian;        // d currents / d pin voltages
    Eigen::VectorXd eval_voltages;   // pin voltages after junction limiting
    std::vector<double> junctions;   // limited controlling voltages (state for the next iterate)
    bool limited = false;
    double element_current = 0.0;
    double element_voltage = 0.0;

    /// Norton part of the companion: currents - jacobian * eval_voltages.
    [[nodiscard]] Eigen::VectorXd equivalent_currents() const { return currents - jacobian * eval_voltages; }
};

[[nodiscard]] std::optional<NonlinearModel> nonlinear_model(const ComponentInstance& instance);
[[nodiscard]] std::span<const std::string> nonlinear_pins(const NonlinearModel& model);

/// Companion model at `pin_voltages`. When `previous_junctions` is given,
/// each pn junction step is limited relative to it first.
[[nodiscard]] NonlinearEval evaluate(const NonlinearModel& model, std::span<const double> pin_voltages,
                                     std::optional<std::span<const double>> previous_junctions = std::nullopt);

[[nodiscard]] NonlinearEval eval_nonlinear(const ComponentInstance& instance, std::span<const double> pin_voltages,
                                           std::optional<std::span<const double>> previous_junctions = std::nullopt);

/// n*Vt*ln(n*Vt / (Is*sqrt(2))).
[[nodiscard]] double critical_voltage(double saturation_current, double emission) noexcept;

/// Spice pnjlim: damps a junction voltage step above the critical voltage.
[[nodiscard]] double limit_junction(double v_new, double v_old, double n_vt, double v_crit) noexcept;

/// Potentiometer halves (1-wiper, wiper-2). Each side is at least Rmax*1e-3
/// and the two always sum to Rmax.
[[nodiscard]] std::pair<double, double> potentiometer_split(double max_resistance, double position) noexcept;

/// IR distance sensor output, clamped to [0.4, 3.1] V.
[[nodiscard]] double ir_sensor_output(double distance_cm) noexcept;

}  // namespace circsim
