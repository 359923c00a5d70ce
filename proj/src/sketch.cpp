#include "circsim/sketch.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "circsim/devices.hpp"
#include "circsim/error.hpp"

namespace circsim {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnknownTerminal: return "UNKNOWN_TERMINAL";
        case ErrorCode::NotSimulatable: return "NOT_SIMULATABLE";
        case ErrorCode::Singular: return "SINGULAR";
        case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
        case ErrorCode::ParseError: return "PARSE_ERROR";
        case ErrorCode::SchemaError: return "SCHEMA_ERROR";
        case ErrorCode::UnknownSession: return "UNKNOWN_SESSION";
    }
    return "UNKNOWN";
}

std::string to_string(const Terminal& t) { return t.component + "." + t.pin; }

std::string_view to_string(Rail rail) noexcept {
    switch (rail) {
        case Rail::TopPlus: return "V+top";
        case Rail::TopMinus: return "V−top";
        case Rail::BottomPlus: return "V+bot";
        case Rail::BottomMinus: return "V−bot";
    }
    return "";
}

std::optional<Rail> parse_rail(std::string_view tag) noexcept {
    if (tag == "V+top") return Rail::TopPlus;
    if (tag == "V+bot") return Rail::BottomPlus;
    if (tag == "V−top" || tag == "V-top") return Rail::TopMinus;
    if (tag == "V−bot" || tag == "V-bot") return Rail::BottomMinus;
    return std::nullopt;
}

std::string to_string(const Location& loc) {
    std::ostringstream os;
    if (const auto* h = std::get_if<BreadboardHole>(&loc)) {
        os << h->board << ":" << h->row << h->column;
    } else if (const auto* r = std::get_if<RailHole>(&loc)) {
        os << r->board << ":" << to_string(r->rail) << "#" << r->position;
    } else {
        os << to_string(std::get<DirectTerminal>(loc).terminal);
    }
    return os.str();
}

bool BreadboardSpec::contains(const BreadboardHole& hole) const noexcept {
    return hole.board == id && hole.column >= 1 && hole.column <= columns && hole.row >= 'a' && hole.row <= 'j';
}

bool BreadboardSpec::contains(const RailHole& hole) const noexcept {
    return hole.board == id && hole.position >= 1 && hole.position <= kRailPositions;
}

double ComponentInstance::number(std::string_view name, double fallback) const {
    auto it = properties.find(std::string(name));
    if (it == properties.end()) return fallback;
    if (const auto* d = std::get_if<double>(&it->second)) return *d;
    return fallback;
}

std::string ComponentInstance::text(std::string_view name, std::string_view fallback) const {
    auto it = properties.find(std::string(name));
    if (it == properties.end()) return std::string(fallback);
    if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
    return std::string(fallback);
}

const ComponentInstance* Sketch::find_component(std::string_view id) const noexcept {
    auto it = std::find_if(components.begin(), components.end(), [&](const auto& c) { return c.id == id; });
    return it == components.end() ? nullptr : &*it;
}

ComponentInstance* Sketch::find_component(std::string_view id) noexcept {
    auto it = std::find_if(components.begin(), components.end(), [&](const auto& c) { return c.id == id; });
    return it == components.end() ? nullptr : &*it;
}

const BreadboardSpec* Sketch::find_board(std::string_view id) const noexcept {
    auto it = std::find_if(breadboards.begin(), breadboards.end(), [&](const auto& b) { return b.id == id; });
    return it == breadboards.end() ? nullptr : &*it;
}

const Wire* Sketch::find_wire(std::string_view id) const noexcept {
    auto it = std::find_if(wires.begin(), wires.end(), [&](const auto& w) { return w.id == id; });
    return it == wires.end() ? nullptr : &*it;
}

std::string_view to_string(DiagnosticCode code) noexcept {
    switch (code) {
        case DiagnosticCode::DupId: return "DUP_ID";
        case DiagnosticCode::BadPin: return "BAD_PIN";
        case DiagnosticCode::HoleConflict: return "HOLE_CONFLICT";
        case DiagnosticCode::BadProperty: return "BAD_PROPERTY";
        case DiagnosticCode::DanglingRef: return "DANGLING_REF";
        case DiagnosticCode::ParseError: return "PARSE_ERROR";
        case DiagnosticCode::SchemaError: return "SCHEMA_ERROR";
    }
    return "UNKNOWN";
}

std::string to_string(const Diagnostic& d) {
    std::ostringstream os;
    os << to_string(d.code) << "(" << d.subject;
    if (!d.detail.empty()) os << ", " << d.detail;
    os << ")";
    if (d.line > 0) os << " at " << d.line << ":" << d.column;
    return os.str();
}

namespace {

class Validator {
public:
    explicit Validator(const Sketch& sketch) : sketch_(sketch) {}

    std::vector<Diagnostic> run() {
        check_boards();
        check_components();
        check_wires();
        return std::move(out_);
    }

private:
    void report(DiagnosticCode code, std::string subject, std::string detail) {
        out_.push_back({code, std::move(subject), std::move(detail), 0, 0});
    }

    void check_boards() {
        std::set<std::string> seen;
        for (const auto& b : sketch_.breadboards) {
            if (!seen.insert(b.id).second) report(DiagnosticCode::DupId, b.id, "breadboard");
        }
    }

    // Returns false when the location cannot be resolved.
    bool check_location(const std::string& owner, const Location& loc) {
        if (const auto* h = std::get_if<BreadboardHole>(&loc)) {
            const auto* board = sketch_.find_board(h->board);
            if (board == nullptr || !board->contains(*h)) {
                report(DiagnosticCode::DanglingRef, owner, "hole " + to_string(loc));
                return false;
            }
        } else if (const auto* r = std::get_if<RailHole>(&loc)) {
            const auto* board = sketch_.find_board(r->board);
            if (board == nullptr || !board->contains(*r)) {
                report(DiagnosticCode::DanglingRef, owner, "hole " + to_string(loc));
                return false;
            }
        } else {
            const auto& t = std::get<DirectTerminal>(loc).terminal;
            const auto* target = sketch_.find_component(t.component);
            if (target == nullptr) {
                report(DiagnosticCode::DanglingRef, owner, "component " + t.component);
                return false;
            }
            if (!descriptor_for(*target).has_pin(t.pin)) {
                report(DiagnosticCode::BadPin, owner, to_string(t));
                return false;
            }
        }
        return true;
    }

    void check_components() {
        std::set<std::string> seen;
        std::set<std::string> occupied;
        for (const auto& c : sketch_.components) {
            if (!seen.insert(c.id).second) report(DiagnosticCode::DupId, c.id, "");

            const auto desc = descriptor_for(c);
            const bool registered = registry_lookup(c.kind).known();
            for (const auto& [pin, loc] : c.placements) {
                if (!desc.has_pin(pin)) {
                    report(DiagnosticCode::BadPin, c.id, pin);
                    continue;
                }
                if (const auto* d = std::get_if<DirectTerminal>(&loc);
                    d != nullptr && d->terminal == Terminal{c.id, pin}) {
                    report(DiagnosticCode::BadPin, c.id, pin + " placed on itself");
                    continue;
                }
                if (!check_location(c.id, loc)) continue;
                if (!std::holds_alternative<DirectTerminal>(loc) && !occupied.insert(to_string(loc)).second) {
                    report(DiagnosticCode::HoleConflict, c.id, to_string(loc));
                }
            }
            if (registered && !desc.pins_optional) {
                for (const auto& pin : desc.pins) {
                    if (!c.placements.contains(pin)) report(DiagnosticCode::BadPin, c.id, pin + " not placed");
                }
            }
            if (!registered) continue;
            for (const auto& [name, value] : c.properties) {
                const auto* spec = desc.property(name);
                if (spec == nullptr || !spec->accepts(value)) report(DiagnosticCode::BadProperty, c.id, name);
            }
        }
    }

    void check_wires() {
        std::set<std::string> seen;
        for (const auto& w : sketch_.wires) {
            if (!seen.insert(w.id).second) report(DiagnosticCode::DupId, w.id, "wire");
            const bool ok_a = check_location(w.id, w.a);
            const bool ok_b = check_location(w.id, w.b);
            if (ok_a && ok_b && w.a == w.b) report(DiagnosticCode::HoleConflict, w.id, "wire joins " + to_string(w.a) + " to itself");
        }
    }

    const Sketch& sketch_;
    std::vector<Diagnostic> out_;
};

}  // namespace

std::vector<Diagnostic> validate_sketch(const Sketch& sketch) { return Validator(sketch).run(); }

}  // namespace circsim
