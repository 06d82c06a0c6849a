#pragma once

#include <optional>
#include <string>
#include <vector>

#include "splanner/diagnostics.hpp"
#include "splanner/gateway/gateway.hpp"
#include "splanner/sim/episode.hpp"

namespace splanner::run {

struct TaskSpec {
  std::string id;
  std::string instruction;
  sim::GoalSpec goal;
  bool operator==(const TaskSpec&) const = default;
};

struct RunManifest {
  std::string models_path;   // .efsm file or directory of them
  std::string lexicon_path;
  std::string executor = "oracle";  // or "vlm"
  std::string out_dir = "out";
  std::string replay_path;          // transcript for the vlm executor
  gateway::GatewayConfig gateway;
  uint64_t seed = 0;
  int step_limit = 30;
  int jobs = 1;
  std::vector<TaskSpec> tasks;
};

struct ManifestResult {
  std::optional<RunManifest> manifest;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return manifest.has_value(); }
};

ManifestResult load_manifest(const std::string& path);
ManifestResult parse_manifest(const std::string& text,
                              const std::string& filename = "");

// Parses and validates one .efsm file or every .efsm file in a directory
// into a single knowledge base.
struct ModelsResult {
  std::optional<efsm::KnowledgeBase> kb;
  std::vector<Diagnostic> diagnostics;
  bool io_error = false;
  bool ok() const { return kb.has_value(); }
};

ModelsResult load_models(const std::string& path);

struct TaskResult {
  std::string id;
  std::string outcome;  // episode outcome, or "parse_failure"
  int steps = 0;
  bool success = false;  // check_goal verdict
  std::vector<std::string> trace;
};

struct RunReport {
  std::vector<TaskResult> tasks;  // sorted by task id
  size_t successes = 0;
  // "task <id> outcome=<o> steps=<n> success=<0|1>" lines plus the final
  // "aggregate tasks=<N> successes=<K> success_rate=<R>" line.
  std::string to_text() const;
};

// Runs every task: lexicon parse -> solve -> template render -> episode ->
// check_goal. Trace files and report.txt land in manifest.out_dir. Throws
// std::runtime_error on setup failures (unreadable models/lexicon, bad
// executor config); per-task failures are recorded, not thrown.
RunReport execute_run(const RunManifest& manifest);

}  // namespace splanner::run
