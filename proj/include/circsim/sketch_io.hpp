#pragma once

// Sketch files, spice netlists and simulation reports.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "circsim/failures.hpp"
#include "circsim/instruments.hpp"
#include "circsim/mna.hpp"
#include "circsim/nets.hpp"
#include "circsim/sketch.hpp"

namespace circsim {

inline constexpr int kSketchFormatVersion = 1;

struct ParseResult {
    std::optional<Sketch> sketch;  // absent on PARSE_ERROR / SCHEMA_ERROR
    std::vector<Diagnostic> diagnostics;

    [[nodiscard]] bool ok() const noexcept { return sketch.has_value() && diagnostics.empty(); }
};

/// Parses sketch JSON. Syntax errors give PARSE_ERROR with line and column,
/// unknown or mistyped fields SCHEMA_ERROR with the field path. A
/// structurally sound file always yields a sketch; validate_sketch findings
/// are appended to the diagnostics.
[[nodiscard]] ParseResult parse_sketch(std::string_view text);

[[nodiscard]] nlohmann::ordered_json sketch_to_json(const Sketch& sketch);
/// Throws Error(SchemaError) with the field path in the message.
[[nodiscard]] Sketch sketch_from_json(const nlohmann::ordered_json& doc);
[[nodiscard]] nlohmann::ordered_json location_to_json(const Location& loc);
[[nodiscard]] Location location_from_json(const nlohmann::ordered_json& doc, std::string_view default_board = {});

/// Pretty-printed, two-space indent, trailing newline.
[[nodiscard]] std::string serialize_sketch(const Sketch& sketch);

/// Reads and parses a file; a missing file is a PARSE_ERROR at line 0.
[[nodiscard]] ParseResult load_sketch(const std::string& path);

/// Spice deck for the DC operating point. Byte-stable.
[[nodiscard]] std::string export_netlist(const Sketch& sketch, const NetMap& netmap);

/// Spice number with engineering suffix: 1000 -> "1k", 1e-7 -> "100n".
[[nodiscard]] std::string spice_value(double value);

// ---------------------------------------------------------------------------

struct SolverSummary {
    bool converged = false;
    int iterations = 0;
    std::string strategy = "none";

    bool operator==(const SolverSummary&) const = default;
};

struct ReportDocument {
    std::string sketch_name;
    SolverSummary solver;
    std::map<int, double> nodes;  // net id -> V
    std::vector<Reading> readings;
    std::vector<SmokeEvent> smoke;
    std::vector<std::string> excluded;
    std::vector<Diagnostic> diagnostics;
    std::optional<std::string> error;  // solver failure message

    bool operator==(const ReportDocument&) const = default;
};

/// Everything one simulation pass produces. Only filled past validation.
struct SimulationResult {
    ReportDocument report;
    std::optional<NetMap> netmap;
    std::optional<Solution> solution;
};

/// validate -> extract_nets -> solve_op -> readings -> failure checks.
/// Invalid sketches stop after validation; solver failures are recorded in
/// report.error instead of thrown.
[[nodiscard]] SimulationResult simulate(const Sketch& sketch, const SolveOptions& opts = {});

enum class ReportFormat { Text, Json };

[[nodiscard]] std::string write_report(const ReportDocument& report, ReportFormat format);

[[nodiscard]] nlohmann::ordered_json report_to_json(const ReportDocument& report);
[[nodiscard]] nlohmann::ordered_json reading_to_json(const Reading& reading);
[[nodiscard]] nlohmann::ordered_json smoke_to_json(const SmokeEvent& event);
[[nodiscard]] nlohmann::ordered_json diagnostic_to_json(const Diagnostic& diagnostic);

}  // namespace circsim
