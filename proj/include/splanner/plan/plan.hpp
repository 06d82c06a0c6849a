#pragma once

#include <string>
#include <vector>

#include "splanner/gateway/gateway.hpp"
#include "splanner/intent/intent.hpp"
#include "splanner/solver/solve.hpp"

namespace splanner::plan {

// Emitted verbatim when no execution path exists.
inline constexpr const char* kFallbackMessage =
    "No feasible execution path exists.";

enum class ProvenanceKind { Path, AppSwitch, Fallback, Polished };

struct Provenance {
  ProvenanceKind kind = ProvenanceKind::Path;
  size_t segment = 0;  // Path/AppSwitch: which GlobalPath segment
  size_t step = 0;     // Path: which PathStep within the segment

  bool operator==(const Provenance&) const = default;
};

struct PlanStep {
  std::string text;
  Provenance provenance;

  bool operator==(const PlanStep&) const = default;
};

struct Plan {
  std::string preamble;  // one-line task restatement; empty for fallback
  std::vector<PlanStep> steps;
  std::vector<std::string> notes;  // POLISH_REJECTED / POLISH_SKIPPED markers
  bool fallback = false;

  bool operator==(const Plan&) const = default;
};

// One numbered step per path step, plus an "Open the <app> application."
// step before each segment (before the first too when the path is
// non-empty). Deterministic.
Plan render_template(const solver::GlobalPath& path,
                     const intent::Instruction& instruction);

// The single-step plan for infeasible intents; never polished.
Plan render_fallback();

// Best-effort refinement: asks the gateway for a reworded numbered plan and
// adopts it only when it stays within [N, N+2] steps, numbered contiguously
// from 1, with no empty step and no {placeholder} syntax. Anything else
// returns the draft unchanged with a POLISH_REJECTED or POLISH_SKIPPED note.
Plan polish_llm(const Plan& draft, const intent::Instruction& instruction,
                gateway::Gateway& gw);

// Preamble line, blank line, then "N. <step>" lines.
std::string to_text(const Plan& plan);

// Prompt builder shared with tests that record replay transcripts.
std::vector<gateway::Message> polish_messages(
    const Plan& draft, const intent::Instruction& instruction);

std::string app_switch_text(const std::string& app_id);

}  // namespace splanner::plan
