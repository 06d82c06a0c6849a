#pragma once

#include <string>
#include <vector>

#include "splanner/efsm/model.hpp"

namespace splanner::efsm {

// A search node: where the machine is, what its variables hold, and how many
// targets of the pending sequence have been achieved so far.
struct Configuration {
    int state_index = 0;
    Valuation valuation;
    size_t achieved = 0;

    bool operator==(const Configuration&) const = default;
};

// True iff every atom of the guard holds under the valuation. The empty guard
// is the empty conjunction and always holds.
bool eval_guard(const Guard& g, const Valuation& v);

// Returns a fresh valuation with the assignments applied in order; the input
// is left untouched and unmentioned variables keep their values.
Valuation apply_update(const Update& u, const Valuation& v);

// The machine at its initial state with all variables at their declared
// initial values and nothing achieved yet.
Configuration initial_configuration(const Efsm& m);

// Extracts the `{name}` placeholders appearing in an event text, in order of
// appearance (duplicates preserved). Only balanced `{identifier}` runs count.
std::vector<std::string> extract_placeholders(const std::string& text);

// Replaces each `{name}` with its binding. Names without a binding are left
// in place (validation guarantees this never happens for well-formed models).
std::string substitute_placeholders(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& bindings);

}  // namespace splanner::efsm
