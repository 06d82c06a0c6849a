#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "splanner/diagnostics.hpp"
#include "splanner/efsm/model.hpp"
#include "splanner/gateway/gateway.hpp"
#include "splanner/solver/solve.hpp"

namespace splanner::intent {

struct Instruction {
  std::string text;

  bool operator==(const Instruction&) const = default;
};

// nullopt when the text is empty after trimming.
std::optional<Instruction> make_instruction(const std::string& text);

// Ordered (app, targets) pairs extracted from one instruction.
struct ParsedIntent {
  std::vector<solver::IntentEntry> entries;

  bool operator==(const ParsedIntent&) const = default;
};

// Read-only snapshot of the knowledge base the parsers work against.
struct CatalogFunction {
  std::string name;
  std::vector<std::string> params;
  std::string description;

  bool operator==(const CatalogFunction&) const = default;
};

struct CatalogApp {
  std::string app_id;
  std::vector<CatalogFunction> functions;

  bool operator==(const CatalogApp&) const = default;
};

struct FunctionCatalog {
  std::vector<CatalogApp> apps;

  const CatalogApp* find(const std::string& app_id) const;
  const CatalogFunction* find_function(const std::string& app_id,
                                       const std::string& name) const;
  bool operator==(const FunctionCatalog&) const = default;
};

FunctionCatalog build_catalog(const efsm::KnowledgeBase& kb);

// Lexicon pattern token: a literal keyword or a named capture slot.
struct LexToken {
  bool is_slot = false;
  std::string text;  // lowercased keyword, or slot name

  bool operator==(const LexToken&) const = default;
};

struct LexiconRule {
  std::vector<LexToken> tokens;
  std::string app_id;
  std::string function;
  std::string pattern;  // original pattern text, for error reporting
  int line = 0;
};

struct Lexicon {
  std::vector<LexiconRule> rules;
};

struct LexiconResult {
  std::optional<Lexicon> lexicon;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return lexicon.has_value(); }
};

// One rule per line: `pattern TAB app_id.function_name`. `{slot}` in the
// pattern captures a maximal run of non-keyword tokens.
LexiconResult parse_lexicon(const std::string& text,
                            const std::string& filename = "");
LexiconResult load_lexicon(const std::string& path);

struct NoMatch {};

struct AmbiguousMatch {
  size_t token_index = 0;  // instruction token where the tie occurred
  std::vector<std::string> patterns;
};

using LexiconParseResult = std::variant<ParsedIntent, NoMatch, AmbiguousMatch>;

// Longest-match, left-to-right scan; keyword comparison is case-insensitive,
// captured slot text passes through verbatim. Consecutive matches against the
// same app merge into one intent entry.
LexiconParseResult parse_intent_lexicon(const Instruction& instruction,
                                        const FunctionCatalog& catalog,
                                        const Lexicon& lexicon);

// Central validation every producer's output goes through: apps and functions
// exist, argument bindings cover the formals exactly.
std::vector<Diagnostic> validate_intent(const ParsedIntent& intent,
                                        const efsm::KnowledgeBase& kb);

struct ParseFailure {
  std::string first_reply;
  std::string second_reply;
  std::string reason;
};

using LlmParseResult =
    std::variant<ParsedIntent, ParseFailure, gateway::GatewayError>;

// Asks the gateway to emit APP/CALL lines for the instruction; a reply that
// fails validation gets exactly one repair round.
LlmParseResult parse_intent_llm(const Instruction& instruction,
                                const FunctionCatalog& catalog,
                                gateway::Gateway& gw);

// Prompt text shared with tests that record replay transcripts.
std::vector<gateway::Message> parsing_messages(const Instruction& instruction,
                                               const FunctionCatalog& catalog);
std::vector<gateway::Message> repair_messages(
    const std::vector<gateway::Message>& previous, const std::string& reply,
    const std::string& error);

}  // namespace splanner::intent
