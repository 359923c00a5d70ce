#pragma once

// JSON messages exchanged over the session WebSocket.

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "circsim/lab/session.hpp"

namespace circsim::lab {

struct HighlightRequest {
    Terminal terminal;
};

using ClientMessage = std::variant<Mutation, HighlightRequest>;

/// Throws Error(ParseError) for malformed JSON and Error(SchemaError) for an
/// unknown op or missing/mistyped fields.
[[nodiscard]] ClientMessage parse_client_message(std::string_view text);

/// {"op":"results","revision":n, ...report fields...}
[[nodiscard]] nlohmann::ordered_json frame_to_json(const ResultsFrame& frame);
[[nodiscard]] std::string results_message(const ResultsFrame& frame);
[[nodiscard]] std::string highlight_message(const std::set<Terminal>& terminals);
[[nodiscard]] std::string rejected_message(std::uint64_t revision, const std::vector<Diagnostic>& diagnostics);

}  // namespace circsim::lab
