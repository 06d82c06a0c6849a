#include "splanner/diagnostics.hpp"

#include <sstream>

namespace splanner {

const char* to_string(DiagCode code) {
    switch (code) {
        case DiagCode::UNKNOWN_STATE: return "UNKNOWN_STATE";
        case DiagCode::UNKNOWN_VAR: return "UNKNOWN_VAR";
        case DiagCode::UNKNOWN_FUNCTION: return "UNKNOWN_FUNCTION";
        case DiagCode::UNKNOWN_APP: return "UNKNOWN_APP";
        case DiagCode::DOMAIN_MISMATCH: return "DOMAIN_MISMATCH";
        case DiagCode::DUPLICATE_NAME: return "DUPLICATE_NAME";
        case DiagCode::BAD_PLACEHOLDER: return "BAD_PLACEHOLDER";
        case DiagCode::NO_INITIAL_STATE: return "NO_INITIAL_STATE";
        case DiagCode::SYNTAX_ERROR: return "SYNTAX_ERROR";
        case DiagCode::UNTERMINATED_BLOCK: return "UNTERMINATED_BLOCK";
        case DiagCode::DUPLICATE_SECTION: return "DUPLICATE_SECTION";
        case DiagCode::NO_FUNCTIONS: return "NO_FUNCTIONS";
        case DiagCode::VALUATION_SPACE_LARGE: return "VALUATION_SPACE_LARGE";
    }
    return "UNKNOWN";
}

std::string format_diagnostic(const Diagnostic& d) {
    std::ostringstream os;
    if (d.span && d.span->known()) {
        if (!d.span->file.empty()) os << d.span->file << ':';
        os << d.span->line << ':' << d.span->column << ": ";
    }
    os << (d.severity == Severity::Error ? "error " : "warning ");
    os << to_string(d.code) << ": " << d.message;
    if (!d.location.empty()) os << " (at " << d.location << ')';
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const Diagnostic& d) {
    return os << format_diagnostic(d);
}

}  // namespace splanner
