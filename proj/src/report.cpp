#include <algorithm>
#include <cstdio>
#include <sstream>

#include "circsim/devices.hpp"
#include "circsim/error.hpp"
#include "circsim/sketch_io.hpp"

namespace circsim {

using Json = nlohmann::ordered_json;

SimulationResult simulate(const Sketch& sketch, const SolveOptions& opts) {
    SimulationResult result;
    auto& report = result.report;
    report.sketch_name = sketch.name;
    report.diagnostics = validate_sketch(sketch);
    for (const auto& c : sketch.components) {
        if (!registry_lookup(c.kind).simulatable) report.excluded.push_back(c.id);
    }
    std::sort(report.excluded.begin(), report.excluded.end());
    if (!report.diagnostics.empty()) return result;

    std::vector<const ComponentInstance*> meters;
    for (const auto& c : sketch.components) {
        if (c.kind == "multimeter") meters.push_back(&c);
    }
    std::sort(meters.begin(), meters.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
    // Blank screens when there is no operating point.
    auto blank_meters = [&] {
        for (const auto* m : meters) {
            report.readings.push_back({m->id, ReadingStatus::Unsupported, std::nullopt, "---"});
        }
    };

    result.netmap = extract_nets(sketch);
    const auto& netmap = *result.netmap;
    try {
        result.solution = solve_op(sketch, netmap, opts);
    } catch (const NoConvergence& e) {
        report.solver.iterations = e.iterations();
        report.error = e.what();
        blank_meters();
        return result;
    } catch (const Error& e) {
        report.error = e.what();
        blank_meters();
        return result;
    }

    const auto& sol = *result.solution;
    report.solver = {sol.converged, sol.iterations, std::string(to_string(sol.strategy))};
    report.nodes = sol.node_voltages;
    for (const auto* m : meters) report.readings.push_back(compute_reading(meter_config(*m), netmap, sol));
    report.smoke = check_failures(sketch, sol);
    return result;
}

// ---------------------------------------------------------------------------

Json reading_to_json(const Reading& r) {
    Json j{{"meter", r.meter_id}, {"status", std::string(to_string(r.status))}};
    if (r.value) j["value"] = *r.value;
    j["display"] = r.display;
    return j;
}

Json smoke_to_json(const SmokeEvent& e) {
    Json j{{"component", e.component},
           {"kind", std::string(to_string(e.kind))},
           {"measured", e.measured},
           {"limit", e.limit},
           {"unit", e.unit}};
    if (e.pin) j["pin"] = *e.pin;
    return j;
}

Json diagnostic_to_json(const Diagnostic& d) {
    Json j{{"code", std::string(to_string(d.code))}, {"subject", d.subject}, {"detail", d.detail}};
    if (d.line > 0) {
        j["line"] = d.line;
        j["column"] = d.column;
    }
    return j;
}

Json report_to_json(const ReportDocument& report) {
    Json j;
    j["sketch"] = report.sketch_name;
    j["solver"] = Json{{"converged", report.solver.converged},
                       {"iterations", report.solver.iterations},
                       {"strategy", report.solver.strategy}};
    if (report.error) j["solver"]["error"] = *report.error;
    j["nodes"] = Json::object();
    for (const auto& [id, volts] : report.nodes) j["nodes"][std::to_string(id)] = volts;
    j["readings"] = Json::array();
    for (const auto& r : report.readings) j["readings"].push_back(reading_to_json(r));
    j["smoke"] = Json::array();
    for (const auto& e : report.smoke) j["smoke"].push_back(smoke_to_json(e));
    j["excluded"] = report.excluded;
    j["diagnostics"] = Json::array();
    for (const auto& d : report.diagnostics) j["diagnostics"].push_back(diagnostic_to_json(d));
    return j;
}

namespace {

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string text_report(const ReportDocument& r) {
    std::ostringstream os;
    os << "sketch: " << r.sketch_name << "\n";
    os << "solver: " << (r.solver.converged ? "converged" : "not converged") << " iterations=" << r.solver.iterations
       << " strategy=" << r.solver.strategy << "\n";
    if (r.error) os << "error: " << *r.error << "\n";
    if (!r.nodes.empty()) {
        os << "nodes:\n";
        for (const auto& [id, volts] : r.nodes) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "  %-6d %14.6f V\n", id, volts);
            os << buf;
        }
    }
    if (!r.readings.empty()) {
        os << "readings:\n";
        for (const auto& m : r.readings) os << "  " << m.meter_id << "  " << m.display << "\n";
    }
    if (!r.excluded.empty()) {
        os << "excluded:";
        for (const auto& id : r.excluded) os << " " << id;
        os << "\n";
    }
    for (const auto& d : r.diagnostics) os << "diagnostic: " << to_string(d) << "\n";
    for (const auto& e : r.smoke) {
        os << "SMOKE " << e.component << " " << to_string(e.kind) << " measured=" << number(e.measured) << e.unit
           << " limit=" << number(e.limit) << e.unit;
        if (e.pin) os << " pin=" << *e.pin;
        os << "\n";
    }
    return os.str();
}

}  // namespace

std::string write_report(const ReportDocument& report, ReportFormat format) {
    if (format == ReportFormat::Json) return report_to_json(report).dump(2) + "\n";
    return text_report(report);
}

}  // namespace circsim
