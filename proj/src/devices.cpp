#include "circsim/devices.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "circsim/error.hpp"

namespace circsim {

bool PropertySpec::accepts(const PropertyValue& value) const {
    if (is_numeric()) {
        const auto* v = std::get_if<double>(&value);
        if (v == nullptr || !std::isfinite(*v)) return false;
        if (min_exclusive ? *v <= min : *v < min) return false;
        return *v <= max;
    }
    const auto* s = std::get_if<std::string>(&value);
    return s != nullptr && std::find(choices.begin(), choices.end(), *s) != choices.end();
}

const PropertySpec* DeviceDescriptor::property(std::string_view name) const noexcept {
    auto it = std::find_if(properties.begin(), properties.end(), [&](const auto& p) { return p.name == name; });
    return it == properties.end() ? nullptr : &*it;
}

bool DeviceDescriptor::has_pin(std::string_view pin) const noexcept {
    return std::find(pins.begin(), pins.end(), pin) != pins.end();
}

namespace {

constexpr double kHuge = 1e12;

PropertySpec number(std::string name, std::string unit, double def, double min, double max, bool min_exclusive = false) {
    return {std::move(name), std::move(unit), def, min, max, min_exclusive, {}};
}

PropertySpec positive(std::string name, std::string unit, double def, double max = kHuge) {
    return number(std::move(name), std::move(unit), def, 0.0, max, true);
}

PropertySpec choice(std::string name, std::string def, std::vector<std::string> choices) {
    return {std::move(name), "", std::move(def), 0.0, 0.0, false, std::move(choices)};
}

// Declares limit properties matching `limits`, so each instance can override them.
void add_limit_properties(DeviceDescriptor& d) {
    if (d.limits.max_current) d.properties.push_back(positive("max_current", "A", *d.limits.max_current));
    if (d.limits.max_power) d.properties.push_back(positive("max_power", "W", *d.limits.max_power));
    if (d.limits.max_voltage) d.properties.push_back(positive("max_voltage", "V", *d.limits.max_voltage));
    if (d.limits.polarized) {
        d.properties.push_back(number("max_reverse_voltage", "V", d.limits.max_reverse_voltage, 0.0, kHuge));
    }
}

DeviceDescriptor make(std::string kind, std::vector<std::string> pins, std::vector<PropertySpec> props, LimitSet limits,
                      bool nonlinear = false) {
    DeviceDescriptor d;
    d.kind = std::move(kind);
    d.pins = std::move(pins);
    d.properties = std::move(props);
    d.simulatable = true;
    d.nonlinear = nonlinear;
    d.limits = limits;
    add_limit_properties(d);
    return d;
}

std::map<std::string, DeviceDescriptor, std::less<>> build_registry() {
    std::map<std::string, DeviceDescriptor, std::less<>> r;
    auto put = [&](DeviceDescriptor d) { r.emplace(d.kind, std::move(d)); };

    put(make("resistor", {"1", "2"}, {positive("resistance", "Ω", 1000.0)}, {.max_power = 0.25}));
    put(make("potentiometer", {"1", "wiper", "2"},
             {positive("max_resistance", "Ω", 10000.0), number("position", "", 0.5, 0.0, 1.0)},
             {.max_power = 0.25}));
    for (const auto& [kind, volts] : {std::pair{"battery", 9.0}, std::pair{"dc_supply", 5.0}}) {
        put(make(kind, {"+", "-"},
                 {number("voltage", "V", volts, 0.0, 1000.0), number("internal_resistance", "Ω", 0.5, 0.0, kHuge)},
                 {.max_current = 2.0}));
    }
    put(make("switch_spst", {"1", "2"}, {choice("state", "open", {"open", "closed"})}, {}));
    put(make("switch_spdt", {"COM", "T1", "T2"}, {choice("state", "T1", {"T1", "T2"})}, {}));
    put(make("diode", {"anode", "cathode"},
             {positive("saturation_current", "A", 1e-14, 1.0), positive("emission_coefficient", "", 1.0, 10.0)},
             {.max_current = 1.0}, true));
    put(make("led", {"anode", "cathode"},
             {positive("saturation_current", "A", 1e-18, 1.0), positive("emission_coefficient", "", 2.0, 10.0)},
             {.max_current = 0.020}, true));
    put(make("ceramic_capacitor", {"1", "2"}, {positive("capacitance", "F", 100e-9, 1.0)}, {.max_voltage = 50.0}));
    put(make("electrolytic_capacitor", {"+", "-"}, {positive("capacitance", "F", 10e-6, 1.0)},
             {.max_voltage = 16.0, .polarized = true, .max_reverse_voltage = 0.3}));
    put(make("tantalum_capacitor", {"+", "-"}, {positive("capacitance", "F", 1e-6, 1.0)},
             {.max_voltage = 16.0, .polarized = true, .max_reverse_voltage = 0.3}));
    put(make("inductor", {"1", "2"}, {positive("inductance", "H", 1e-3, 1e3)}, {.max_current = 1.0}));
    put(make("dc_motor", {"1", "2"}, {positive("resistance", "Ω", 10.0)}, {.max_voltage = 6.0}));
    put(make("bjt_npn", {"collector", "base", "emitter"},
             {positive("saturation_current", "A", 1e-15, 1.0), positive("beta_f", "", 100.0, 1e6),
              positive("beta_r", "", 1.0, 1e6)},
             {}, true));
    put(make("nmos", {"drain", "gate", "source"},
             {number("threshold_voltage", "V", 1.0, -100.0, 100.0), positive("transconductance", "A/V²", 1e-3, 1e3)},
             {}, true));
    put(make("nand_gate", {"VDD", "VSS", "A_in", "B_in", "OUT"},
             {positive("input_resistance", "Ω", 10e6), positive("output_resistance", "Ω", 200.0)},
             {.max_current = 0.010}, true));
    put(make("ir_sensor", {"VCC", "GND", "OUT"},
             {number("distance_cm", "cm", 20.0, 4.0, 80.0), positive("output_resistance", "Ω", 100.0)},
             {.max_current = 0.020, .max_voltage = 5.5, .polarized = true, .max_reverse_voltage = 0.3}));
    put(make("ground", {"GND"}, {}, {}));

    auto meter = make("multimeter", {"COM", "VΩ", "A"}, {choice("mode", "V_DC", {"V_DC", "V_AC", "A_DC", "A_AC", "OHM"})}, {});
    meter.pins_optional = true;
    put(std::move(meter));
    return r;
}

const std::map<std::string, DeviceDescriptor, std::less<>>& registry() {
    static const auto r = build_registry();
    return r;
}

double prop(const ComponentInstance& c, const DeviceDescriptor& d, std::string_view name) {
    const auto* spec = d.property(name);
    return c.number(name, spec != nullptr ? std::get<double>(spec->default_value) : 0.0);
}

std::string prop_text(const ComponentInstance& c, const DeviceDescriptor& d, std::string_view name) {
    const auto* spec = d.property(name);
    return c.text(name, spec != nullptr ? std::get<std::string>(spec->default_value) : "");
}

}  // namespace

DeviceDescriptor registry_lookup(std::string_view kind) {
    const auto& r = registry();
    if (auto it = r.find(kind); it != r.end()) return it->second;
    DeviceDescriptor unknown;
    unknown.kind = std::string(kind);
    return unknown;
}

DeviceDescriptor descriptor_for(const ComponentInstance& instance) {
    auto d = registry_lookup(instance.kind);
    if (!d.known()) {
        for (const auto& [pin, loc] : instance.placements) d.pins.push_back(pin);
    }
    return d;
}

std::vector<std::string> simulatable_kinds() {
    std::vector<std::string> kinds;
    for (const auto& [kind, d] : registry()) {
        if (d.simulatable) kinds.push_back(kind);
    }
    return kinds;
}

LimitSet limits_for(const ComponentInstance& instance) {
    const auto d = registry_lookup(instance.kind);
    LimitSet l = d.limits;
    if (l.max_current) l.max_current = instance.number("max_current", *l.max_current);
    if (l.max_power) l.max_power = instance.number("max_power", *l.max_power);
    if (l.max_voltage) l.max_voltage = instance.number("max_voltage", *l.max_voltage);
    if (l.polarized) l.max_reverse_voltage = instance.number("max_reverse_voltage", l.max_reverse_voltage);
    return l;
}

std::string device_reference_markdown() {
    auto fmt = [](double v) {
        std::ostringstream os;
        os << v;
        return os.str();
    };
    std::ostringstream os;
    os << "# Device reference\n\n"
       << "Generated by `circsim devices`. Every default below is an ordinary component property and can be\n"
       << "overridden per instance in the sketch file.\n\n"
       << "| kind | pins | properties (default) | max current | max power | max voltage | reverse voltage |\n"
       << "|---|---|---|---|---|---|---|\n";
    for (const auto& [kind, d] : registry()) {
        os << "| `" << kind << "` | ";
        for (std::size_t i = 0; i < d.pins.size(); ++i) os << (i ? ", " : "") << "`" << d.pins[i] << "`";
        os << " | ";
        bool first = true;
        for (const auto& p : d.properties) {
            // Limit overrides have their own columns.
            if (p.name == "max_current" || p.name == "max_power" || p.name == "max_voltage" ||
                p.name == "max_reverse_voltage") {
                continue;
            }
            os << (first ? "" : "<br>") << p.name << " = ";
            first = false;
            if (p.is_numeric()) {
                os << fmt(std::get<double>(p.default_value)) << (p.unit.empty() ? "" : " " + p.unit);
            } else {
                os << std::get<std::string>(p.default_value) << " (";
                for (std::size_t i = 0; i < p.choices.size(); ++i) os << (i ? "/" : "") << p.choices[i];
                os << ")";
            }
        }
        auto cell = [&](const std::optional<double>& v, const char* unit) {
            os << " | " << (v ? fmt(*v) + " " + unit : "-");
        };
        cell(d.limits.max_current, "A");
        cell(d.limits.max_power, "W");
        cell(d.limits.max_voltage, "V");
        os << " | " << (d.limits.polarized ? "-" + fmt(d.limits.max_reverse_voltage) + " V" : "-") << " |\n";
    }
    os << "\nNon-simulatable parts (any other kind) are carried through the sketch, reported as excluded,\n"
       << "and emitted as `* skipped` comments in exported netlists.\n";
    return os.str();
}

// ---------------------------------------------------------------------------

StampContext::StampContext(const NetMap& netmap)
    : netmap_(&netmap), first_internal_(static_cast<NodeId>(netmap.nets.size()) + 1) {}

NodeId StampContext::node(const Terminal& t) const {
    const int id = netmap_->net_id(t);
    return netmap_->net(id).is_ground ? 0 : id;
}

NodeId StampContext::internal_node(std::string label) {
    internal_labels_.push_back(std::move(label));
    return first_internal_ + static_cast<NodeId>(internal_labels_.size()) - 1;
}

std::pair<double, double> potentiometer_split(double max_resistance, double position) noexcept {
    constexpr double kMinFraction = 1e-3;
    const double p = std::clamp(position, kMinFraction, 1.0 - kMinFraction);
    // Larger share first; the smaller one is then an exact difference, so the
    // two add back to max_resistance without rounding.
    const double large = max_resistance - std::min(p, 1.0 - p) * max_resistance;
    const double small = max_resistance - large;
    return p <= 0.5 ? std::pair{small, large} : std::pair{large, small};
}

double ir_sensor_output(double distance_cm) noexcept {
    return std::min(3.1, std::max(0.4, 27.86 / (distance_cm + 0.42)));
}

std::vector<LinearStamp> stamp_linear(const ComponentInstance& c, StampContext& ctx) {
    const auto d = registry_lookup(c.kind);
    if (!d.simulatable) throw Error(ErrorCode::NotSimulatable, c.id + " (" + c.kind + ") cannot be simulated");

    auto n = [&](const char* pin) { return ctx.node({c.id, pin}); };
    const std::string& k = c.kind;
    std::vector<LinearStamp> out;

    if (k == "resistor" || k == "dc_motor") {
        out.emplace_back(Conductance{n("1"), n("2"), 1.0 / prop(c, d, "resistance")});
    } else if (k == "potentiometer") {
        const auto [ra, rb] = potentiometer_split(prop(c, d, "max_resistance"), prop(c, d, "position"));
        out.emplace_back(Conductance{n("1"), n("wiper"), 1.0 / ra});
        out.emplace_back(Conductance{n("wiper"), n("2"), 1.0 / rb});
    } else if (k == "battery" || k == "dc_supply") {
        const double volts = prop(c, d, "voltage");
        const double r_int = prop(c, d, "internal_resistance");
        if (r_int > 0.0) {
            const NodeId internal = ctx.internal_node(c.id + "_int");
            out.emplace_back(VoltageSourceBranch{internal, n("-"), volts, c.id});
            out.emplace_back(Conductance{n("+"), internal, 1.0 / r_int});
        } else {
            out.emplace_back(VoltageSourceBranch{n("+"), n("-"), volts, c.id});
        }
    } else if (k == "switch_spst") {
        if (prop_text(c, d, "state") == "closed") out.emplace_back(Conductance{n("1"), n("2"), 1.0 / kSwitchOnResistance});
    } else if (k == "switch_spdt") {
        const std::string thrown = prop_text(c, d, "state");
        out.emplace_back(Conductance{n("COM"), ctx.node({c.id, thrown}), 1.0 / kSwitchOnResistance});
    } else if (k == "inductor") {
        out.emplace_back(VoltageSourceBranch{n("1"), n("2"), 0.0, c.id});
    } else if (k == "nand_gate") {
        const double g_in = 1.0 / prop(c, d, "input_resistance");
        out.emplace_back(Conductance{n("A_in"), n("VSS"), g_in});
        out.emplace_back(Conductance{n("B_in"), n("VSS"), g_in});
    } else if (k == "ir_sensor") {
        const NodeId internal = ctx.internal_node(c.id + "_int");
        out.emplace_back(VoltageSourceBranch{internal, n("GND"), ir_sensor_output(prop(c, d, "distance_cm")), c.id});
        out.emplace_back(Conductance{internal, n("OUT"), 1.0 / prop(c, d, "output_resistance")});
    }
    // Capacitors are open at DC; diodes, transistors and ground have no linear part.
    return out;
}

// ---------------------------------------------------------------------------

double critical_voltage(double saturation_current, double emission) noexcept {
    const double n_vt = emission * kThermalVoltage;
    return n_vt * std::log(n_vt / (saturation_current * std::sqrt(2.0)));
}

double limit_junction(double v_new, double v_old, double n_vt, double v_crit) noexcept {
    if (v_new > v_crit && std::abs(v_new - v_old) > 2.0 * n_vt) {
        if (v_old > 0.0) {
            const double arg = 1.0 + (v_new - v_old) / n_vt;
            return arg > 0.0 ? v_old + n_vt * std::log(arg) : v_crit;
        }
        return n_vt * std::log(v_new / n_vt);
    }
    return v_new;
}

namespace {

constexpr double kMaxExponent = 700.0;

struct Junction {
    double current;
    double conductance;
};

// Shockley equation, continued linearly past exp(700).
Junction shockley(double v, double is, double n_vt) noexcept {
    const double arg = v / n_vt;
    if (arg > kMaxExponent) {
        const double e = std::exp(kMaxExponent);
        return {is * (e * (1.0 + arg - kMaxExponent) - 1.0), is * e / n_vt};
    }
    const double e = std::exp(arg);
    return {is * (e - 1.0), is * e / n_vt};
}

double limited(double raw, std::optional<std::span<const double>> previous, std::size_t index, double n_vt,
               double v_crit) {
    if (!previous || previous->size() <= index) return raw;
    return limit_junction(raw, (*previous)[index], n_vt, v_crit);
}

const std::array<std::string, 2> kDiodePins{"anode", "cathode"};
const std::array<std::string, 3> kBjtPins{"collector", "base", "emitter"};
const std::array<std::string, 3> kMosPins{"drain", "gate", "source"};
const std::array<std::string, 5> kNandPins{"VDD", "VSS", "A_in", "B_in", "OUT"};

NonlinearEval eval_diode(const DiodeModel& m, std::span<const double> v, std::optional<std::span<const double>> prev) {
    const double n_vt = m.emission * kThermalVoltage;
    const double raw = v[0] - v[1];
    const double vd = limited(raw, prev, 0, n_vt, critical_voltage(m.saturation_current, m.emission));
    const auto [id, g] = shockley(vd, m.saturation_current, n_vt);

    NonlinearEval e;
    e.currents = Eigen::Vector2d(id, -id);
    e.jacobian.resize(2, 2);
    e.jacobian << g, -g, -g, g;
    e.eval_voltages = Eigen::Vector2d(v[1] + vd, v[1]);
    e.junctions = {vd};
    e.limited = vd != raw;
    e.element_current = id;
    e.element_voltage = vd;
    return e;
}

NonlinearEval eval_bjt(const BjtModel& m, std::span<const double> v, std::optional<std::span<const double>> prev) {
    const double vt = kThermalVoltage;
    const double v_crit = critical_voltage(m.saturation_current, 1.0);
    const double vbe_raw = v[1] - v[2];
    const double vbc_raw = v[1] - v[0];
    const double vbe = limited(vbe_raw, prev, 0, vt, v_crit);
    const double vbc = limited(vbc_raw, prev, 1, vt, v_crit);
    const auto [i_f, g_f] = shockley(vbe, m.saturation_current, vt);
    const auto [i_r, g_r] = shockley(vbc, m.saturation_current, vt);

    const double ic = i_f - i_r * (1.0 + 1.0 / m.beta_r);
    const double ib = i_f / m.beta_f + i_r / m.beta_r;
    const double ie = -i_f * (1.0 + 1.0 / m.beta_f) + i_r;

    // d(vbe)/d(c,b,e) = (0, 1, -1); d(vbc)/d(c,b,e) = (-1, 1, 0)
    const Eigen::RowVector3d dvbe(0.0, 1.0, -1.0);
    const Eigen::RowVector3d dvbc(-1.0, 1.0, 0.0);

    NonlinearEval e;
    e.currents = Eigen::Vector3d(ic, ib, ie);
    e.jacobian.resize(3, 3);
    e.jacobian.row(0) = g_f * dvbe - g_r * (1.0 + 1.0 / m.beta_r) * dvbc;
    e.jacobian.row(1) = g_f / m.beta_f * dvbe + g_r / m.beta_r * dvbc;
    e.jacobian.row(2) = -g_f * (1.0 + 1.0 / m.beta_f) * dvbe + g_r * dvbc;
    const double ve = v[2];
    const double vb = ve + vbe;
    e.eval_voltages = Eigen::Vector3d(vb - vbc, vb, ve);
    e.junctions = {vbe, vbc};
    e.limited = vbe != vbe_raw || vbc != vbc_raw;
    e.element_current = ic;
    e.element_voltage = (vb - vbc) - ve;
    return e;
}

NonlinearEval eval_nmos(const NmosModel& m, std::span<const double> v) {
    // Symmetric device: the higher of drain/source acts as the drain.
    const bool reversed = v[0] < v[2];
    const int d = reversed ? 2 : 0;
    const int s = reversed ? 0 : 2;
    const double vgs = v[1] - v[s];
    const double vds = v[d] - v[s];
    const double vov = vgs - m.threshold;

    double id = 0.0;
    double gm = 0.0;
    double gds = 0.0;
    if (vov > 0.0) {
        if (vds < vov) {
            id = m.k * (vov * vds - 0.5 * vds * vds);
            gm = m.k * vds;
            gds = m.k * (vov - vds);
        } else {
            id = 0.5 * m.k * vov * vov;
            gm = m.k * vov;
        }
    }

    NonlinearEval e;
    e.currents = Eigen::Vector3d::Zero();
    e.currents[d] = id;
    e.currents[s] = -id;
    e.jacobian = Eigen::Matrix3d::Zero();
    e.jacobian(d, d) = gds;
    e.jacobian(d, 1) = gm;
    e.jacobian(d, s) = -gm - gds;
    e.jacobian.row(s) = -e.jacobian.row(d);
    e.eval_voltages = Eigen::Vector3d(v[0], v[1], v[2]);
    e.element_current = e.currents[0];
    e.element_voltage = v[0] - v[2];
    return e;
}

NonlinearEval eval_nand(const NandModel& m, std::span<const double> v) {
    constexpr double kGain = 20.0;  // transfer slope k = kGain / VDD
    constexpr double kMaxArg = 60.0;
    const double vdd = v[0] - v[1];
    const double va = v[2] - v[1];
    const double vb = v[3] - v[1];
    const bool a_low = va <= vb;
    const double m_in = a_low ? va : vb;

    double voc = 0.0;
    double dvoc_dvdd = 0.0;
    double dvoc_dm = 0.0;
    if (vdd > 0.0) {
        const double x_raw = kGain * m_in / vdd - kGain / 2.0;
        const double x = std::clamp(x_raw, -kMaxArg, kMaxArg);
        const double s = 1.0 / (1.0 + std::exp(x));
        voc = vdd * s;
        if (x == x_raw) {
            dvoc_dvdd = s + s * (1.0 - s) * kGain * m_in / vdd;
            dvoc_dm = -kGain * s * (1.0 - s);
        } else {
            dvoc_dvdd = s;
        }
    }

    const double g = 1.0 / m.output_resistance;
    const double i_out = (v[4] - v[1] - voc) * g;  // into OUT

    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(5);
    row[4] = g;
    row[0] = -dvoc_dvdd * g;
    row[a_low ? 2 : 3] = -dvoc_dm * g;
    row[1] = (-1.0 + dvoc_dvdd + dvoc_dm) * g;

    NonlinearEval e;
    e.currents = Eigen::VectorXd::Zero(5);
    e.currents[4] = i_out;
    e.currents[1] = -i_out;
    e.jacobian = Eigen::MatrixXd::Zero(5, 5);
    e.jacobian.row(4) = row;
    e.jacobian.row(1) = -row;
    e.eval_voltages = Eigen::Map<const Eigen::VectorXd>(v.data(), 5);
    e.element_current = i_out;
    e.element_voltage = v[4] - v[1];
    return e;
}

}  // namespace

std::optional<NonlinearModel> nonlinear_model(const ComponentInstance& c) {
    const auto d = registry_lookup(c.kind);
    if (c.kind == "diode" || c.kind == "led") {
        return DiodeModel{prop(c, d, "saturation_current"), prop(c, d, "emission_coefficient")};
    }
    if (c.kind == "bjt_npn") {
        return BjtModel{prop(c, d, "saturation_current"), prop(c, d, "beta_f"), prop(c, d, "beta_r")};
    }
    if (c.kind == "nmos") return NmosModel{prop(c, d, "threshold_voltage"), prop(c, d, "transconductance")};
    if (c.kind == "nand_gate") return NandModel{prop(c, d, "output_resistance")};
    return std::nullopt;
}

std::span<const std::string> nonlinear_pins(const NonlinearModel& model) {
    struct Visitor {
        std::span<const std::string> operator()(const DiodeModel&) const { return kDiodePins; }
        std::span<const std::string> operator()(const BjtModel&) const { return kBjtPins; }
        std::span<const std::string> operator()(const NmosModel&) const { return kMosPins; }
        std::span<const std::string> operator()(const NandModel&) const { return kNandPins; }
    };
    return std::visit(Visitor{}, model);
}

NonlinearEval evaluate(const NonlinearModel& model, std::span<const double> pin_voltages,
                       std::optional<std::span<const double>> previous_junctions) {
    struct Visitor {
        std::span<const double> v;
        std::optional<std::span<const double>> prev;
        NonlinearEval operator()(const DiodeModel& m) const { return eval_diode(m, v, prev); }
        NonlinearEval operator()(const BjtModel& m) const { return eval_bjt(m, v, prev); }
        NonlinearEval operator()(const NmosModel& m) const { return eval_nmos(m, v); }
        NonlinearEval operator()(const NandModel& m) const { return eval_nand(m, v); }
    };
    return std::visit(Visitor{pin_voltages, previous_junctions}, model);
}

NonlinearEval eval_nonlinear(const ComponentInstance& instance, std::span<const double> pin_voltages,
                             std::optional<std::span<const double>> previous_junctions) {
    const auto model = nonlinear_model(instance);
    if (!model) throw Error(ErrorCode::NotSimulatable, instance.id + " (" + instance.kind + ") is not a nonlinear device");
    return evaluate(*model, pin_voltages, previous_junctions);
}

}  // namespace circsim
