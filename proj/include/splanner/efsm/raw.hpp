#pragma once

#include <optional>
#include <string>
#include <vector>

#include "splanner/diagnostics.hpp"

namespace splanner::efsm {

// Unvalidated machine descriptions, as produced by the model parser or built
// directly in memory. Every node carries the span of its source text when it
// came from a file; programmatically built nodes leave spans defaulted.

struct RawVar {
    std::string name;
    bool is_bool = true;
    std::vector<std::string> enum_values;  // empty for bool
    std::string initial;
    SourceSpan span{};
};

struct RawFunction {
    std::string name;
    std::vector<std::string> params;
    std::string description;
    SourceSpan span{};
};

struct RawAtom {
    std::string var;
    bool equals = true;
    std::string literal;
    SourceSpan span{};
};

struct RawAssign {
    std::string var;
    std::string literal;
    SourceSpan span{};
};

struct RawAction {
    std::string function;
    std::vector<std::string> slots;
    bool has_slot_list = false;  // "does f" vs "does f(a, b)"
    SourceSpan span{};
};

struct RawTransition {
    std::string id;
    std::string source;
    std::string target;
    std::string event_text;
    std::vector<RawAtom> guard;
    std::vector<RawAssign> update;
    std::optional<RawAction> action;
    SourceSpan span{};
};

struct RawApp {
    std::string app_id;
    std::vector<RawVar> vars;
    std::vector<std::string> states;
    std::vector<SourceSpan> state_spans;       // parallel to states when parsed
    std::vector<std::string> initial_states;   // names marked with "*"; exactly one expected
    std::vector<RawFunction> functions;
    std::vector<RawTransition> transitions;
    SourceSpan span{};
};

// An ordered collection of unvalidated app descriptions from one or more files.
struct ModelDocument {
    std::vector<RawApp> apps;
};

}  // namespace splanner::efsm
