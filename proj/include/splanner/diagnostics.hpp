#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace splanner {

// Position of a construct in a model source file. line/column are 1-based.
struct SourceSpan {
    std::string file;
    int line = 1;
    int column = 1;
    int length = 1;

    bool known() const { return !file.empty() || line != 1 || column != 1; }
    bool operator==(const SourceSpan&) const = default;
};

enum class DiagCode {
    // validation
    UNKNOWN_STATE,
    UNKNOWN_VAR,
    UNKNOWN_FUNCTION,
    UNKNOWN_APP,
    DOMAIN_MISMATCH,
    DUPLICATE_NAME,
    BAD_PLACEHOLDER,
    NO_INITIAL_STATE,
    // syntax
    SYNTAX_ERROR,
    UNTERMINATED_BLOCK,
    DUPLICATE_SECTION,
    // warnings
    NO_FUNCTIONS,
    VALUATION_SPACE_LARGE,
};

enum class Severity { Error, Warning };

const char* to_string(DiagCode code);

struct Diagnostic {
    DiagCode code;
    Severity severity = Severity::Error;
    std::string message;
    std::string location;            // state/transition/variable name, when known
    std::optional<SourceSpan> span;  // set when the construct came from a source file

    bool is_error() const { return severity == Severity::Error; }
};

// Renders "file:line:col: error CODE: message (at location)".
std::string format_diagnostic(const Diagnostic& d);

inline bool has_errors(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags) {
        if (d.is_error()) return true;
    }
    return false;
}

std::ostream& operator<<(std::ostream& os, const Diagnostic& d);

}  // namespace splanner
