#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <variant>

#include "circsim/error.hpp"
#include "circsim/sketch_io.hpp"

namespace circsim {

using Json = nlohmann::ordered_json;

namespace {

using PathSegment = std::variant<std::string, std::size_t>;
using Path = std::vector<PathSegment>;

std::string path_string(const Path& path) {
    std::string out;
    for (const auto& seg : path) {
        if (const auto* key = std::get_if<std::string>(&seg)) {
            if (!out.empty()) out += '.';
            out += *key;
        } else {
            out += "[" + std::to_string(std::get<std::size_t>(seg)) + "]";
        }
    }
    return out.empty() ? "$" : out;
}

struct SchemaViolation {
    Path path;
    std::string detail;
};

// Walks a JSON value while keeping the path for error messages.
class Reader {
public:
    Reader(const Json& value, Path path) : value_(value), path_(std::move(path)) {}

    [[noreturn]] void fail(std::string detail) const { throw SchemaViolation{path_, std::move(detail)}; }

    const Json& value() const noexcept { return value_; }
    const Path& path() const noexcept { return path_; }

    void expect_object(std::initializer_list<std::string_view> allowed) const {
        if (!value_.is_object()) fail("expected an object");
        for (const auto& [key, _] : value_.items()) {
            bool known = false;
            for (auto a : allowed) known = known || a == key;
            if (!known) child(key).fail("unknown field");
        }
    }

    bool has(std::string_view key) const { return value_.contains(key); }

    Reader child(const std::string& key) const {
        Path p = path_;
        p.emplace_back(key);
        static const Json kNull;
        return {value_.contains(key) ? value_.at(key) : kNull, std::move(p)};
    }

    Reader element(std::size_t i) const {
        Path p = path_;
        p.emplace_back(i);
        return {value_.at(i), std::move(p)};
    }

    Reader required(const std::string& key) const {
        if (!has(key)) child(key).fail("missing required field");
        return child(key);
    }

    std::string string() const {
        if (!value_.is_string()) fail("expected a string");
        return value_.get<std::string>();
    }

    long long integer() const {
        if (!value_.is_number_integer()) fail("expected an integer");
        return value_.get<long long>();
    }

    int small_int() const {
        const long long v = integer();
        if (v < -1000000 || v > 1000000) fail("integer out of range");
        return static_cast<int>(v);
    }

    std::size_t array_size() const {
        if (!value_.is_array()) fail("expected an array");
        return value_.size();
    }

private:
    const Json& value_;
    Path path_;
};

Location read_location(const Reader& r, std::string_view default_board) {
    if (!r.value().is_object()) r.fail("expected a location object");
    auto board = [&]() { return r.has("board") ? r.child("board").string() : std::string(default_board); };
    if (r.has("component")) {
        r.expect_object({"component", "pin"});
        return DirectTerminal{{r.required("component").string(), r.required("pin").string()}};
    }
    if (r.has("rail")) {
        r.expect_object({"board", "rail", "position"});
        const auto tag = r.child("rail").string();
        const auto rail = parse_rail(tag);
        if (!rail) r.child("rail").fail("unknown rail \"" + tag + "\"");
        return RailHole{board(), *rail, r.required("position").small_int()};
    }
    r.expect_object({"board", "column", "row"});
    const auto row = r.required("row").string();
    if (row.size() != 1) r.child("row").fail("expected a single row letter");
    return BreadboardHole{board(), r.required("column").small_int(), row[0]};
}

Sketch read_sketch(const Reader& root) {
    root.expect_object({"format_version", "name", "breadboards", "components", "wires"});
    const auto version = root.required("format_version").integer();
    if (version != kSketchFormatVersion) root.child("format_version").fail("unsupported format_version " + std::to_string(version));

    Sketch s;
    if (root.has("name")) s.name = root.child("name").string();

    if (root.has("breadboards")) {
        const auto boards = root.child("breadboards");
        for (std::size_t i = 0; i < boards.array_size(); ++i) {
            const auto b = boards.element(i);
            b.expect_object({"id", "columns"});
            BreadboardSpec spec;
            spec.id = b.required("id").string();
            if (b.has("columns")) {
                spec.columns = b.child("columns").small_int();
                if (spec.columns < 1) b.child("columns").fail("columns must be positive");
            }
            s.breadboards.push_back(std::move(spec));
        }
    }
    const std::string default_board = s.breadboards.empty() ? std::string() : s.breadboards.front().id;

    if (root.has("components")) {
        const auto comps = root.child("components");
        for (std::size_t i = 0; i < comps.array_size(); ++i) {
            const auto c = comps.element(i);
            c.expect_object({"id", "kind", "properties", "placements"});
            ComponentInstance inst;
            inst.id = c.required("id").string();
            inst.kind = c.required("kind").string();
            if (c.has("properties")) {
                const auto props = c.child("properties");
                if (!props.value().is_object()) props.fail("expected an object");
                for (const auto& [name, value] : props.value().items()) {
                    if (value.is_number()) {
                        inst.properties[name] = value.get<double>();
                    } else if (value.is_string()) {
                        inst.properties[name] = value.get<std::string>();
                    } else {
                        props.child(name).fail("expected a number or a string");
                    }
                }
            }
            if (c.has("placements")) {
                const auto places = c.child("placements");
                if (!places.value().is_object()) places.fail("expected an object");
                for (const auto& [pin, _] : places.value().items()) {
                    inst.placements[pin] = read_location(places.child(pin), default_board);
                }
            }
            s.components.push_back(std::move(inst));
        }
    }

    if (root.has("wires")) {
        const auto wires = root.child("wires");
        for (std::size_t i = 0; i < wires.array_size(); ++i) {
            const auto w = wires.element(i);
            w.expect_object({"id", "a", "b"});
            s.wires.push_back({w.required("id").string(), read_location(w.required("a"), default_board),
                               read_location(w.required("b"), default_board)});
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Source positions for schema errors. The text is known to be valid JSON.

struct LineColumn {
    int line = 0;
    int column = 0;
};

LineColumn line_column(std::string_view text, std::size_t offset) {
    LineColumn lc{1, 1};
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++lc.line;
            lc.column = 1;
        } else if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
            ++lc.column;
        }
    }
    return lc;
}

class PositionFinder {
public:
    explicit PositionFinder(std::string_view text) : text_(text) {}

    // Offset of the deepest resolvable element of `path` (key for members).
    std::size_t find(const Path& path) {
        pos_ = 0;
        best_ = 0;
        path_ = &path;
        skip_ws();
        value(0);
        return best_;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\n' || text_[pos_] == '\r' || text_[pos_] == '\t')) ++pos_;
    }

    std::string string_token() {
        std::string out;
        ++pos_;  // opening quote
        while (pos_ < text_.size() && text_[pos_] != '"') {
            if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
            out.push_back(text_[pos_++]);
        }
        ++pos_;
        return out;
    }

    // `depth` = number of path segments matched so far, or -1 when off-path.
    void value(int depth) {
        const bool on_path = depth >= 0;
        const char ch = text_[pos_];
        if (ch == '{') {
            ++pos_;
            skip_ws();
            while (pos_ < text_.size() && text_[pos_] != '}') {
                const std::size_t key_at = pos_;
                const std::string key = string_token();
                int next = -1;
                if (on_path && static_cast<std::size_t>(depth) < path_->size()) {
                    const auto* want = std::get_if<std::string>(&(*path_)[static_cast<std::size_t>(depth)]);
                    if (want != nullptr && *want == key) {
                        best_ = key_at;
                        next = depth + 1;
                    }
                }
                skip_ws();
                ++pos_;  // ':'
                skip_ws();
                value(next);
                skip_ws();
                if (text_[pos_] == ',') ++pos_;
                skip_ws();
            }
            ++pos_;
        } else if (ch == '[') {
            ++pos_;
            skip_ws();
            std::size_t index = 0;
            while (pos_ < text_.size() && text_[pos_] != ']') {
                int next = -1;
                if (on_path && static_cast<std::size_t>(depth) < path_->size()) {
                    const auto* want = std::get_if<std::size_t>(&(*path_)[static_cast<std::size_t>(depth)]);
                    if (want != nullptr && *want == index) {
                        best_ = pos_;
                        next = depth + 1;
                    }
                }
                value(next);
                skip_ws();
                if (text_[pos_] == ',') ++pos_;
                skip_ws();
                ++index;
            }
            ++pos_;
        } else if (ch == '"') {
            string_token();
        } else {
            while (pos_ < text_.size() && std::string_view(",]} \n\r\t").find(text_[pos_]) == std::string_view::npos) ++pos_;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t best_ = 0;
    const Path* path_ = nullptr;
};

}  // namespace

Json location_to_json(const Location& loc) {
    if (const auto* h = std::get_if<BreadboardHole>(&loc)) {
        return Json{{"board", h->board}, {"column", h->column}, {"row", std::string(1, h->row)}};
    }
    if (const auto* r = std::get_if<RailHole>(&loc)) {
        return Json{{"board", r->board}, {"rail", std::string(to_string(r->rail))}, {"position", r->position}};
    }
    const auto& t = std::get<DirectTerminal>(loc).terminal;
    return Json{{"component", t.component}, {"pin", t.pin}};
}

Location location_from_json(const Json& doc, std::string_view default_board) {
    try {
        return read_location(Reader(doc, {}), default_board);
    } catch (const SchemaViolation& v) {
        throw Error(ErrorCode::SchemaError, path_string(v.path) + ": " + v.detail);
    }
}

Json sketch_to_json(const Sketch& sketch) {
    Json doc;
    doc["format_version"] = kSketchFormatVersion;
    doc["name"] = sketch.name;
    doc["breadboards"] = Json::array();
    for (const auto& b : sketch.breadboards) doc["breadboards"].push_back(Json{{"id", b.id}, {"columns", b.columns}});
    doc["components"] = Json::array();
    for (const auto& c : sketch.components) {
        Json props = Json::object();
        for (const auto& [name, value] : c.properties) {
            std::visit([&](const auto& v) { props[name] = v; }, value);
        }
        Json places = Json::object();
        for (const auto& [pin, loc] : c.placements) places[pin] = location_to_json(loc);
        doc["components"].push_back(Json{{"id", c.id}, {"kind", c.kind}, {"properties", props}, {"placements", places}});
    }
    doc["wires"] = Json::array();
    for (const auto& w : sketch.wires) {
        doc["wires"].push_back(Json{{"id", w.id}, {"a", location_to_json(w.a)}, {"b", location_to_json(w.b)}});
    }
    return doc;
}

Sketch sketch_from_json(const Json& doc) {
    try {
        return read_sketch(Reader(doc, {}));
    } catch (const SchemaViolation& v) {
        throw Error(ErrorCode::SchemaError, path_string(v.path) + ": " + v.detail);
    }
}

std::string serialize_sketch(const Sketch& sketch) { return sketch_to_json(sketch).dump(2) + "\n"; }

ParseResult parse_sketch(std::string_view text) {
    ParseResult result;
    Json doc;
    try {
        doc = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
        const auto lc = line_column(text, offset);
        std::string detail = e.what();
        if (const auto at = detail.find("syntax error"); at != std::string::npos) detail = detail.substr(at);
        result.diagnostics.push_back({DiagnosticCode::ParseError, "", detail, lc.line, lc.column});
        return result;
    }
    try {
        result.sketch = read_sketch(Reader(doc, {}));
    } catch (const SchemaViolation& v) {
        const auto lc = line_column(text, PositionFinder(text).find(v.path));
        result.diagnostics.push_back({DiagnosticCode::SchemaError, path_string(v.path), v.detail, lc.line, lc.column});
        return result;
    }
    result.diagnostics = validate_sketch(*result.sketch);
    return result;
}

ParseResult load_sketch(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ParseResult r;
        r.diagnostics.push_back({DiagnosticCode::ParseError, path, "cannot open file", 0, 0});
        return r;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_sketch(buf.str());
}

}  // namespace circsim
