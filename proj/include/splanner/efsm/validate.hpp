#pragma once

#include <optional>
#include <vector>

#include "splanner/diagnostics.hpp"
#include "splanner/efsm/model.hpp"
#include "splanner/efsm/raw.hpp"

namespace splanner::efsm {

// Outcome of validation. `machine` is set iff no error-severity diagnostic was
// produced; warnings may accompany a valid machine.
struct ValidationResult {
    std::optional<Efsm> machine;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return machine.has_value(); }
};

struct KbValidationResult {
    std::optional<KnowledgeBase> kb;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return kb.has_value(); }
};

// Checks every well-formedness rule of the machine description and reports
// all violations, each with a stable code and the name of the offending
// construct. Returns a validated machine only when no violation exists.
ValidationResult validate_efsm(const RawApp& raw);

// Validates every app in the document plus cross-app rules (distinct app ids).
KbValidationResult validate_document(const ModelDocument& doc);

}  // namespace splanner::efsm
