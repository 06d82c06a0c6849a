#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "splanner/diagnostics.hpp"
#include "splanner/efsm/model.hpp"
#include "splanner/efsm/semantics.hpp"

namespace splanner::solver {

// One requested primary-function invocation: args bind formals to concrete
// text (map keeps rendering deterministic).
struct TargetItem {
  std::string function;
  std::map<std::string, std::string> args;

  bool operator==(const TargetItem&) const = default;
};

struct TargetSequence {
  std::vector<TargetItem> items;

  bool empty() const { return items.empty(); }
  size_t size() const { return items.size(); }
  bool operator==(const TargetSequence&) const = default;
};

// (app, targets) pair; a parsed instruction is an ordered list of these.
struct IntentEntry {
  std::string app_id;
  TargetSequence targets;

  bool operator==(const IntentEntry&) const = default;
};

struct ActionCall {
  std::string function;
  std::map<std::string, std::string> args;

  bool operator==(const ActionCall&) const = default;
};

struct PathStep {
  std::string transition_id;
  std::string event_text;  // placeholders already substituted
  std::string source;
  std::string target;
  std::optional<ActionCall> action;
  efsm::Valuation valuation_after;

  bool operator==(const PathStep&) const = default;
};

struct ExecutionPath {
  std::string app_id;
  std::vector<PathStep> steps;

  bool operator==(const ExecutionPath&) const = default;
};

struct GlobalPath {
  std::vector<ExecutionPath> segments;

  bool operator==(const GlobalPath&) const = default;
};

// First-class "no path exists" result; drives the fallback plan downstream.
struct Infeasible {
  bool operator==(const Infeasible&) const = default;
};

using SolveResult = std::variant<ExecutionPath, Infeasible>;
using GlobalResult = std::variant<GlobalPath, Infeasible>;

struct SolveOptions {
  // Ceiling on |states| x |valuations| x (|targets|+1).
  uint64_t max_configurations = 1'000'000;
};

class ConfigSpaceExceeded : public std::runtime_error {
 public:
  explicit ConfigSpaceExceeded(uint64_t configurations, uint64_t ceiling)
      : std::runtime_error("CONFIG_SPACE_EXCEEDED: " +
                           std::to_string(configurations) +
                           " configurations exceed ceiling " +
                           std::to_string(ceiling)) {}
};

class UnknownAppError : public std::runtime_error {
 public:
  explicit UnknownAppError(const std::string& app_id)
      : std::runtime_error("UNKNOWN_APP: " + app_id), app_id(app_id) {}
  std::string app_id;
};

// Checks targets against the machine: functions must exist and the bindings
// must cover each function's formals exactly.
std::vector<Diagnostic> validate_targets(const efsm::Efsm& m,
                                         const TargetSequence& targets);

// BFS over (state, valuation, achieved-target-count) for the shortest
// transition sequence from the initial configuration that invokes the
// targets in order. Transitions expand in declaration order, so ties are
// broken deterministically. A transition carrying an action is applicable
// only when that action is the next pending target.
SolveResult solve(const efsm::Efsm& m, const TargetSequence& targets,
                  const SolveOptions& options = {});

// Solves each entry against its app; Infeasible if any segment is.
GlobalResult solve_all(const efsm::KnowledgeBase& kb,
                       const std::vector<IntentEntry>& entries,
                       const SolveOptions& options = {});

// Stable text listing used by the CLI and golden files.
std::string format_path(const ExecutionPath& path);
std::string format_global(const GlobalPath& global);

}  // namespace splanner::solver
