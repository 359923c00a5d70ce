#include "circsim/lab/protocol.hpp"

#include "circsim/error.hpp"

namespace circsim::lab {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::SchemaError, what); }

const Json& field(const Json& msg, const char* name) {
    if (!msg.contains(name)) schema(std::string("missing field \"") + name + "\"");
    return msg.at(name);
}

std::string text(const Json& msg, const char* name) {
    const auto& v = field(msg, name);
    if (!v.is_string()) schema(std::string("field \"") + name + "\" must be a string");
    return v.get<std::string>();
}

double number(const Json& msg, const char* name) {
    const auto& v = field(msg, name);
    if (!v.is_number()) schema(std::string("field \"") + name + "\" must be a number");
    return v.get<double>();
}

Terminal terminal(const Json& v) {
    if (!v.is_object()) schema("terminal must be an object");
    return {text(v, "component"), text(v, "pin")};
}

}  // namespace

ClientMessage parse_client_message(std::string_view raw) {
    Json msg;
    try {
        msg = Json::parse(raw.begin(), raw.end());
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    if (!msg.is_object()) schema("message must be an object");
    const std::string op = text(msg, "op");

    if (op == "load") return Mutation{LoadSketch{sketch_from_json(field(msg, "sketch"))}};
    if (op == "set_property") {
        const auto& v = field(msg, "value");
        PropertyValue value;
        if (v.is_number()) {
            value = v.get<double>();
        } else if (v.is_string()) {
            value = v.get<std::string>();
        } else {
            schema("field \"value\" must be a number or a string");
        }
        return Mutation{SetProperty{text(msg, "id"), text(msg, "name"), std::move(value)}};
    }
    if (op == "toggle_switch") return Mutation{ToggleSwitch{text(msg, "id")}};
    if (op == "set_pot") return Mutation{SetPotPosition{text(msg, "id"), number(msg, "position")}};
    if (op == "set_meter_mode") return Mutation{SetMeterMode{text(msg, "id"), text(msg, "mode")}};
    if (op == "move_probe") {
        const auto& loc = field(msg, "location");
        std::optional<Location> where;
        if (!loc.is_null()) where = location_from_json(loc);
        return Mutation{MoveProbe{text(msg, "id"), text(msg, "jack"), std::move(where)}};
    }
    if (op == "add_wire") {
        const auto& w = field(msg, "wire");
        if (!w.is_object()) schema("wire must be an object");
        return Mutation{AddWire{Wire{text(w, "id"), location_from_json(field(w, "a")), location_from_json(field(w, "b"))}}};
    }
    if (op == "remove_wire") return Mutation{RemoveWire{text(msg, "id")}};
    if (op == "highlight") return HighlightRequest{terminal(field(msg, "terminal"))};
    schema("unknown op \"" + op + "\"");
}

Json frame_to_json(const ResultsFrame& frame) {
    Json j{{"op", "results"}, {"revision", frame.revision}};
    j.update(report_to_json(frame.report));
    return j;
}

std::string results_message(const ResultsFrame& frame) { return frame_to_json(frame).dump(); }

std::string highlight_message(const std::set<Terminal>& terminals) {
    Json list = Json::array();
    for (const auto& t : terminals) list.push_back(Json{{"component", t.component}, {"pin", t.pin}});
    return Json{{"op", "highlight"}, {"terminals", list}}.dump();
}

std::string rejected_message(std::uint64_t revision, const std::vector<Diagnostic>& diagnostics) {
    Json list = Json::array();
    for (const auto& d : diagnostics) list.push_back(diagnostic_to_json(d));
    return Json{{"op", "rejected"}, {"revision", revision}, {"diagnostics", list}}.dump();
}

}  // namespace circsim::lab
