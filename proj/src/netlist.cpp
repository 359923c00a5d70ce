#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "circsim/devices.hpp"
#include "circsim/sketch_io.hpp"
#include "decimal.hpp"

namespace circsim {

std::string spice_value(double value) {
    if (value == 0.0) return "0";
    if (!std::isfinite(value)) return detail::shortest(value);
    struct Suffix {
        int exponent;
        const char* text;
    };
    static constexpr Suffix kSuffixes[] = {{6, "MEG"}, {3, "k"}, {0, ""}, {-3, "m"}, {-6, "u"}, {-9, "n"}, {-12, "p"}};

    const auto d = detail::decompose(std::abs(value));
    const Suffix* suffix = nullptr;
    for (const auto& s : kSuffixes) {
        if (d.exponent >= s.exponent) {
            suffix = &s;
            break;
        }
    }
    if (suffix == nullptr) return detail::shortest(value);

    const auto int_digits = static_cast<std::size_t>(d.exponent - suffix->exponent + 1);
    std::string text;
    if (int_digits >= d.digits.size()) {
        text = d.digits + std::string(int_digits - d.digits.size(), '0');
    } else {
        text = d.digits.substr(0, int_digits) + "." + d.digits.substr(int_digits);
    }
    return (value < 0 ? "-" : "") + text + suffix->text;
}

namespace {

class NetlistWriter {
public:
    NetlistWriter(const Sketch& sketch, const NetMap& netmap) : sketch_(sketch), netmap_(netmap) {
        int index = 0;
        for (const auto& net : netmap.nets) {
            if (net.is_ground) continue;
            char buf[16];
            std::snprintf(buf, sizeof buf, "N%03d", ++index);
            names_[net.id] = buf;
        }
    }

    std::string run() {
        out_ << "* circsim " << sketch_.name << "\n";
        std::vector<const ComponentInstance*> comps;
        for (const auto& c : sketch_.components) comps.push_back(&c);
        std::sort(comps.begin(), comps.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
        for (const auto* c : comps) component(*c);
        for (const auto& m : models_) out_ << m << "\n";
        out_ << ".op\n.end\n";
        return out_.str();
    }

private:
    std::string node(const ComponentInstance& c, const std::string& pin) const {
        const int id = netmap_.net_id({c.id, pin});
        if (netmap_.net(id).is_ground) return "0";
        return names_.at(id);
    }

    static std::string element(char letter, const std::string& id) {
        if (!id.empty() && std::toupper(static_cast<unsigned char>(id[0])) == letter) return id;
        return std::string(1, letter) + id;
    }

    void line(std::initializer_list<std::string> fields) {
        bool first = true;
        for (const auto& f : fields) {
            if (!first) out_ << ' ';
            out_ << f;
            first = false;
        }
        out_ << "\n";
    }

    void component(const ComponentInstance& c) {
        const auto desc = registry_lookup(c.kind);
        if (!desc.simulatable) {
            out_ << "* skipped " << c.id << " (" << c.kind << ")\n";
            return;
        }
        auto num = [&](const char* name) { return c.number(name, std::get<double>(desc.property(name)->default_value)); };
        auto n = [&](const char* pin) { return node(c, pin); };
        const std::string& k = c.kind;
        const std::string internal = c.id + "_int";

        if (k == "resistor" || k == "dc_motor") {
            line({element('R', c.id), n("1"), n("2"), spice_value(num("resistance"))});
        } else if (k == "potentiometer") {
            const auto [ra, rb] = potentiometer_split(num("max_resistance"), num("position"));
            line({element('R', c.id) + "_a", n("1"), n("wiper"), spice_value(ra)});
            line({element('R', c.id) + "_b", n("wiper"), n("2"), spice_value(rb)});
        } else if (k == "battery" || k == "dc_supply") {
            const double r_int = num("internal_resistance");
            if (r_int > 0.0) {
                line({element('V', c.id), internal, n("-"), "DC", spice_value(num("voltage"))});
                line({element('R', c.id) + "_int", n("+"), internal, spice_value(r_int)});
            } else {
                line({element('V', c.id), n("+"), n("-"), "DC", spice_value(num("voltage"))});
            }
        } else if (k == "switch_spst") {
            if (c.text("state", "open") == "closed") {
                line({element('R', c.id), n("1"), n("2"), spice_value(kSwitchOnResistance)});
            } else {
                out_ << "* open " << c.id << "\n";
            }
        } else if (k == "switch_spdt") {
            line({element('R', c.id), n("COM"), node(c, c.text("state", "T1")), spice_value(kSwitchOnResistance)});
        } else if (k == "diode" || k == "led") {
            const std::string model = "D_" + c.id;
            line({element('D', c.id), n("anode"), n("cathode"), model});
            models_.push_back(".model " + model + " D(IS=" + spice_value(num("saturation_current")) +
                              " N=" + spice_value(num("emission_coefficient")) + ")");
        } else if (k == "ceramic_capacitor") {
            line({element('C', c.id), n("1"), n("2"), spice_value(num("capacitance"))});
        } else if (k == "electrolytic_capacitor" || k == "tantalum_capacitor") {
            line({element('C', c.id), n("+"), n("-"), spice_value(num("capacitance"))});
        } else if (k == "inductor") {
            line({element('L', c.id), n("1"), n("2"), spice_value(num("inductance"))});
        } else if (k == "bjt_npn") {
            const std::string model = "Q_" + c.id;
            line({element('Q', c.id), n("collector"), n("base"), n("emitter"), model});
            models_.push_back(".model " + model + " NPN(IS=" + spice_value(num("saturation_current")) +
                              " BF=" + spice_value(num("beta_f")) + " BR=" + spice_value(num("beta_r")) + ")");
        } else if (k == "nmos") {
            const std::string model = "M_" + c.id;
            line({element('M', c.id), n("drain"), n("gate"), n("source"), n("source"), model});
            models_.push_back(".model " + model + " NMOS(LEVEL=1 VTO=" + spice_value(num("threshold_voltage")) +
                              " KP=" + spice_value(num("transconductance")) + ")");
        } else if (k == "nand_gate") {
            const std::string vdd = "(V(" + n("VDD") + ")-V(" + n("VSS") + "))";
            const std::string low = "min(V(" + n("A_in") + ")-V(" + n("VSS") + "),V(" + n("B_in") + ")-V(" + n("VSS") + "))";
            const std::string oc = c.id + "_oc";
            line({element('B', c.id), oc, n("VSS"), "V=" + vdd + "/(1+exp(20/" + vdd + "*(" + low + "-" + vdd + "/2)))"});
            line({element('R', c.id) + "_out", oc, n("OUT"), spice_value(num("output_resistance"))});
            line({element('R', c.id) + "_a", n("A_in"), n("VSS"), spice_value(num("input_resistance"))});
            line({element('R', c.id) + "_b", n("B_in"), n("VSS"), spice_value(num("input_resistance"))});
        } else if (k == "ir_sensor") {
            line({element('V', c.id), internal, n("GND"), "DC", spice_value(ir_sensor_output(num("distance_cm")))});
            line({element('R', c.id) + "_out", internal, n("OUT"), spice_value(num("output_resistance"))});
        } else if (k == "multimeter") {
            meter(c);
        }
    }

    void meter(const ComponentInstance& c) {
        const auto cfg = meter_config(c);
        const std::string com(kJackCom), vohm(kJackVOhm), amp(kJackAmp);
        if (!validate_probes(cfg, netmap_)) {
            out_ << "* meter " << c.id << " probes invalid\n";
            return;
        }
        switch (cfg.mode) {
            case MeterMode::VoltsDc:
                line({element('R', c.id), node(c, vohm), node(c, com), spice_value(kVoltmeterResistance)});
                break;
            case MeterMode::AmpsDc:
                line({element('V', c.id), node(c, amp), node(c, com), "DC", "0"});
                break;
            case MeterMode::Ohms:
                line({element('I', c.id), node(c, com), node(c, vohm), "DC", spice_value(kOhmmeterCurrent)});
                break;
            case MeterMode::VoltsAc:
            case MeterMode::AmpsAc:
                out_ << "* meter " << c.id << " " << to_string(cfg.mode) << " unsupported\n";
                break;
        }
    }

    const Sketch& sketch_;
    const NetMap& netmap_;
    std::map<int, std::string> names_;
    std::vector<std::string> models_;
    std::ostringstream out_;
};

}  // namespace

std::string export_netlist(const Sketch& sketch, const NetMap& netmap) { return NetlistWriter(sketch, netmap).run(); }

}  // namespace circsim
