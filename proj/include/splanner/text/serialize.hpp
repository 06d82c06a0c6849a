#pragma once

#include <string>

#include "splanner/efsm/model.hpp"

namespace splanner::text {

// Canonical text rendering of a knowledge base: declaration order throughout,
// two-space indentation, empty vars/functions sections elided. Pure function;
// byte-identical output for equal inputs, and parsing the output reproduces
// the input model exactly.
std::string serialize_model(const efsm::KnowledgeBase& kb);
std::string serialize_app(const efsm::Efsm& machine);

// Escapes a string for inclusion in double quotes (\" and \\).
std::string quote(const std::string& s);

}  // namespace splanner::text
