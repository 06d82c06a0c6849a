#pragma once

#include <map>
#include <string>
#include <vector>

#include "splanner/gateway/gateway.hpp"
#include "splanner/intent/intent.hpp"
#include "splanner/plan/plan.hpp"
#include "splanner/sim/device.hpp"

namespace splanner::sim {

struct HistoryEntry {
  int step_index = 0;
  DeviceAction action;
  std::string observation_digest;

  bool operator==(const HistoryEntry&) const = default;
};

enum class Outcome {
  Success,
  StepLimit,
  ExecutorDeclaredInfeasible,
  EnvironmentError,
};

const char* to_string(Outcome outcome);

struct Episode {
  std::string instruction;
  plan::Plan plan;
  int step_limit = 30;
  std::vector<HistoryEntry> history;
  Outcome outcome = Outcome::EnvironmentError;
  std::vector<InvokedFunction> invoked;
  int steps_taken = 0;  // device actions excluding the final status
};

class Executor {
 public:
  virtual ~Executor() = default;
  virtual DeviceAction next_action(const intent::Instruction& instruction,
                                   const Observation& obs,
                                   const plan::Plan& plan,
                                   const std::vector<HistoryEntry>& history) = 0;
};

// The episode loop: query the executor, apply the action, append to the
// history, until a status action or the step limit.
Episode run_episode(DeviceEnvironment& env, Executor& executor,
                    const intent::Instruction& instruction,
                    const plan::Plan& plan, int step_limit = 30);

// Deterministic plan follower: one device action per plan step, cursor =
// number of actions already taken. Declares infeasible on fallback plans and
// whenever the pending step matches no widget.
class OracleExecutor : public Executor {
 public:
  DeviceAction next_action(const intent::Instruction& instruction,
                           const Observation& obs, const plan::Plan& plan,
                           const std::vector<HistoryEntry>& history) override;
};

// Gateway-backed executor: prompts with instruction, plan, screen and
// history; the reply must end with a line `ACTION <kind> [args]`. An invalid
// reply gets one repair round, then the step resolves to status infeasible.
class VlmExecutor : public Executor {
 public:
  explicit VlmExecutor(gateway::Gateway& gw) : gw_(gw) {}
  DeviceAction next_action(const intent::Instruction& instruction,
                           const Observation& obs, const plan::Plan& plan,
                           const std::vector<HistoryEntry>& history) override;

 private:
  gateway::Gateway& gw_;
};

// Prompt builder shared with tests that record replay transcripts.
std::vector<gateway::Message> executor_messages(
    const intent::Instruction& instruction, const Observation& obs,
    const plan::Plan& plan, const std::vector<HistoryEntry>& history);

// Parses the final "ACTION ..." line of an executor reply; nullopt when the
// reply has no such line or the action does not fit the observation.
std::optional<DeviceAction> parse_action_reply(const std::string& reply,
                                               const Observation& obs,
                                               std::string& error);

struct GoalItem {
  std::string app_id;
  std::string function;
  std::map<std::string, std::string> args;

  bool operator==(const GoalItem&) const = default;
};

struct GoalSpec {
  std::vector<GoalItem> items;

  bool operator==(const GoalSpec&) const = default;
};

// True iff the episode succeeded AND the invoked-functions log contains the
// goal as an order-preserving subsequence with exact argument equality.
bool check_goal(const Episode& episode, const GoalSpec& goal);

// One self-contained JSON record per event: reset, each action with the
// resulting observation digest, and the outcome. Deterministic.
std::vector<std::string> trace_lines(const Episode& episode);

}  // namespace splanner::sim
