#include "circsim/instruments.hpp"

#include <cmath>
#include <string>

#include "circsim/error.hpp"
#include "decimal.hpp"

namespace circsim {

std::string_view to_string(MeterMode mode) noexcept {
    switch (mode) {
        case MeterMode::VoltsDc: return "V_DC";
        case MeterMode::VoltsAc: return "V_AC";
        case MeterMode::AmpsDc: return "A_DC";
        case MeterMode::AmpsAc: return "A_AC";
        case MeterMode::Ohms: return "OHM";
    }
    return "";
}

std::optional<MeterMode> parse_meter_mode(std::string_view text) noexcept {
    for (auto m : {MeterMode::VoltsDc, MeterMode::VoltsAc, MeterMode::AmpsDc, MeterMode::AmpsAc, MeterMode::Ohms}) {
        if (to_string(m) == text) return m;
    }
    return std::nullopt;
}

std::string_view to_string(ReadingStatus status) noexcept {
    switch (status) {
        case ReadingStatus::Ok: return "OK";
        case ReadingStatus::Err: return "ERR";
        case ReadingStatus::OverLimit: return "OL";
        case ReadingStatus::Unsupported: return "UNSUPPORTED";
    }
    return "";
}

std::string_view unit_of(MeterMode mode) noexcept {
    switch (mode) {
        case MeterMode::VoltsDc:
        case MeterMode::VoltsAc: return "V";
        case MeterMode::AmpsDc:
        case MeterMode::AmpsAc: return "A";
        case MeterMode::Ohms: return "Ω";
    }
    return "";
}

MultimeterConfig meter_config(const ComponentInstance& instance) {
    if (instance.kind != "multimeter") throw Error(ErrorCode::NotSimulatable, instance.id + " is not a multimeter");
    const auto mode = parse_meter_mode(instance.text("mode", "V_DC"));
    return {instance.id, mode.value_or(MeterMode::VoltsDc)};
}

bool jack_wired(const MultimeterConfig& cfg, const NetMap& netmap, std::string_view jack) {
    const Terminal t{cfg.component_id, std::string(jack)};
    if (!netmap.contains(t)) return false;
    return netmap.net(netmap.net_id(t)).terminals.size() > 1;
}

namespace {

bool uses_amp_jack(MeterMode mode) { return mode == MeterMode::AmpsDc || mode == MeterMode::AmpsAc; }

}  // namespace

bool validate_probes(const MultimeterConfig& cfg, const NetMap& netmap) {
    const std::string_view illegal = uses_amp_jack(cfg.mode) ? kJackVOhm : kJackAmp;
    return !jack_wired(cfg, netmap, illegal);
}

std::vector<LinearStamp> internal_model(const MultimeterConfig& cfg, StampContext& ctx) {
    if (!validate_probes(cfg, ctx.netmap())) return {};
    auto node = [&](std::string_view jack) { return ctx.node({cfg.component_id, std::string(jack)}); };
    switch (cfg.mode) {
        case MeterMode::VoltsDc: return {Conductance{node(kJackVOhm), node(kJackCom), 1.0 / kVoltmeterResistance}};
        case MeterMode::AmpsDc: return {VoltageSourceBranch{node(kJackAmp), node(kJackCom), 0.0, cfg.component_id}};
        case MeterMode::Ohms: return {CurrentSource{node(kJackCom), node(kJackVOhm), kOhmmeterCurrent}};
        case MeterMode::VoltsAc:
        case MeterMode::AmpsAc: break;
    }
    return {};
}

Reading compute_reading(const MultimeterConfig& cfg, const NetMap& netmap, const Solution& solution) {
    Reading r;
    r.meter_id = cfg.component_id;
    auto finish = [&](ReadingStatus status, double value) {
        r.status = status;
        if (status == ReadingStatus::Ok) r.value = value;
        r.display = format_display(status, value, cfg.mode);
        return r;
    };
    if (!validate_probes(cfg, netmap)) return finish(ReadingStatus::Err, 0.0);

    auto volts = [&](std::string_view jack) { return solution.voltage(netmap, {cfg.component_id, std::string(jack)}); };
    switch (cfg.mode) {
        case MeterMode::VoltsAc:
        case MeterMode::AmpsAc: return finish(ReadingStatus::Unsupported, 0.0);
        case MeterMode::VoltsDc: return finish(ReadingStatus::Ok, volts(kJackVOhm) - volts(kJackCom));
        case MeterMode::AmpsDc: {
            auto it = solution.branch_currents.find(cfg.component_id);
            return finish(ReadingStatus::Ok, it == solution.branch_currents.end() ? 0.0 : it->second);
        }
        case MeterMode::Ohms: {
            if (!jack_wired(cfg, netmap, kJackVOhm) || !jack_wired(cfg, netmap, kJackCom)) {
                return finish(ReadingStatus::OverLimit, 0.0);
            }
            const double ohms = (volts(kJackVOhm) - volts(kJackCom)) / kOhmmeterCurrent;
            return finish(ohms > kOhmmeterOverload ? ReadingStatus::OverLimit : ReadingStatus::Ok, ohms);
        }
    }
    return finish(ReadingStatus::Err, 0.0);
}

// ---------------------------------------------------------------------------

namespace {

using detail::decompose;
using detail::round_digits;

struct Prefix {
    int exponent;
    const char* symbol;
};

constexpr Prefix kPrefixes[] = {{6, "M"}, {3, "k"}, {0, ""}, {-3, "m"}, {-6, "µ"}};

}  // namespace

std::string format_si(double value, std::string_view unit) {
    constexpr int kSignificant = 4;
    if (!std::isfinite(value)) return std::string(value != value ? "NaN" : (value > 0 ? "inf" : "-inf")) + std::string(unit);
    if (value == 0.0) return "0.000" + std::string(unit);

    detail::Decimal d = decompose(std::abs(value));
    std::string sign = value < 0 ? "-" : "";
    std::string body;

    if (d.exponent >= -6) {
        std::string digits = d.digits;
        int exponent = d.exponent;
        if (round_digits(digits, kSignificant)) {
            digits.pop_back();
            ++exponent;
        }
        const Prefix* prefix = &kPrefixes[4];
        for (const auto& p : kPrefixes) {
            if (exponent >= p.exponent) {
                prefix = &p;
                break;
            }
        }
        const auto int_digits = static_cast<std::size_t>(exponent - prefix->exponent + 1);
        if (int_digits >= digits.size()) {
            body = digits + std::string(int_digits - digits.size(), '0');
        } else {
            body = digits.substr(0, int_digits) + "." + digits.substr(int_digits);
        }
        body += prefix->symbol;
    } else {
        // Below 1 µ: fixed three decimals of µ.
        std::string digits = d.digits;
        const int keep = d.exponent + 10;
        long long thousandths = 0;
        if (keep == 0) {
            thousandths = digits[0] >= '5' ? 1 : 0;
        } else if (keep > 0) {
            round_digits(digits, keep);
            thousandths = std::stoll(digits);
        }
        if (thousandths == 0) sign.clear();
        const std::string frac = std::to_string(thousandths % 1000);
        body = std::to_string(thousandths / 1000) + "." + std::string(3 - frac.size(), '0') + frac + "µ";
    }
    return sign + body + std::string(unit);
}

std::string format_display(ReadingStatus status, double value, MeterMode mode) {
    switch (status) {
        case ReadingStatus::Ok: return format_si(value, unit_of(mode));
        case ReadingStatus::Err: return "ERR";
        case ReadingStatus::OverLimit: return "OL";
        case ReadingStatus::Unsupported: return "---";
    }
    return "---";
}

}  // namespace circsim
