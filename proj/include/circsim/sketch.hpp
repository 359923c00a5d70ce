#pragma once

// Circuit document model: components placed on breadboards and joined by wires.

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace circsim {

/// One pin of one component instance.
struct Terminal {
    std::string component;
    std::string pin;

    auto operator<=>(const Terminal&) const = default;
    bool operator==(const Terminal&) const = default;
};

[[nodiscard]] std::string to_string(const Terminal& t);

enum class Rail { TopPlus, TopMinus, BottomPlus, BottomMinus };

/// Spelled "V+top", "V−top", "V+bot", "V−bot" (U+2212 minus). The ASCII
/// hyphen forms are accepted on input.
[[nodiscard]] std::string_view to_string(Rail rail) noexcept;
[[nodiscard]] std::optional<Rail> parse_rail(std::string_view tag) noexcept;

/// Main-area hole; rows 'a'..'j'.
struct BreadboardHole {
    std::string board;
    int column = 1;
    char row = 'a';

    bool operator==(const BreadboardHole&) const = default;
};

struct RailHole {
    std::string board;
    Rail rail = Rail::TopPlus;
    int position = 1;

    bool operator==(const RailHole&) const = default;
};

/// Pin clipped straight onto another component's pin (schematic-style wiring).
struct DirectTerminal {
    Terminal terminal;

    bool operator==(const DirectTerminal&) const = default;
};

using Location = std::variant<BreadboardHole, RailHole, DirectTerminal>;

[[nodiscard]] std::string to_string(const Location& loc);

/// Standard 830 tie-point board: rows a-e and f-j of each column are two
/// separate groups, each of the four power rails is one continuous group.
struct BreadboardSpec {
    static constexpr int kDefaultColumns = 63;
    static constexpr int kRailPositions = 50;

    std::string id;
    int columns = kDefaultColumns;

    [[nodiscard]] bool contains(const BreadboardHole& hole) const noexcept;
    [[nodiscard]] bool contains(const RailHole& hole) const noexcept;

    bool operator==(const BreadboardSpec&) const = default;
};

using PropertyValue = std::variant<double, std::string>;

struct ComponentInstance {
    std::string id;
    std::string kind;
    std::map<std::string, PropertyValue> properties;
    std::map<std::string, Location> placements;

    /// Numeric property, or `fallback` when absent or not numeric.
    [[nodiscard]] double number(std::string_view name, double fallback) const;
    /// String property, or `fallback` when absent or not a string.
    [[nodiscard]] std::string text(std::string_view name, std::string_view fallback) const;

    bool operator==(const ComponentInstance&) const = default;
};

struct Wire {
    std::string id;
    Location a;
    Location b;

    bool operator==(const Wire&) const = default;
};

struct Sketch {
    std::string name;
    std::vector<BreadboardSpec> breadboards;
    std::vector<ComponentInstance> components;
    std::vector<Wire> wires;

    [[nodiscard]] const ComponentInstance* find_component(std::string_view id) const noexcept;
    [[nodiscard]] ComponentInstance* find_component(std::string_view id) noexcept;
    [[nodiscard]] const BreadboardSpec* find_board(std::string_view id) const noexcept;
    [[nodiscard]] const Wire* find_wire(std::string_view id) const noexcept;

    bool operator==(const Sketch&) const = default;
};

enum class DiagnosticCode { DupId, BadPin, HoleConflict, BadProperty, DanglingRef, ParseError, SchemaError };

[[nodiscard]] std::string_view to_string(DiagnosticCode code) noexcept;

struct Diagnostic {
    DiagnosticCode code;
    std::string subject;  // component/wire id, or field path for schema errors
    std::string detail;   // property, pin, or free text
    int line = 0;         // 1-based; parse errors only
    int column = 0;

    bool operator==(const Diagnostic&) const = default;
};

[[nodiscard]] std::string to_string(const Diagnostic& d);

/// Checks every Sketch invariant. Empty result iff the sketch is valid.
[[nodiscard]] std::vector<Diagnostic> validate_sketch(const Sketch& sketch);

}  // namespace circsim
