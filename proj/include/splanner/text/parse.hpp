#pragma once

#include <optional>
#include <string>
#include <vector>

#include "splanner/diagnostics.hpp"
#include "splanner/efsm/raw.hpp"

namespace splanner::text {

// Outcome of parsing one model source. `document` is set iff no syntax error
// was found; the diagnostics list carries every error discovered (the parser
// recovers at block boundaries and keeps going).
struct ParseResult {
    std::optional<efsm::ModelDocument> document;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return document.has_value(); }
};

ParseResult parse_model(const std::string& text, const std::string& filename = "");

}  // namespace splanner::text
