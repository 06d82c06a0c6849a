#include "splanner/solver/solve.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

namespace splanner::solver {

namespace {

// BFS node: configuration plus the edge that produced it.
struct Node {
  int state = 0;
  efsm::Valuation valuation;
  size_t achieved = 0;
  int parent = -1;       // index into the node arena
  int via = -1;          // transition index taken from parent
};

std::string node_key(int state, const efsm::Valuation& v, size_t achieved) {
  std::string key;
  key.reserve(v.raw().size() + 8);
  key.push_back(static_cast<char>(state));
  key.push_back(static_cast<char>(state >> 8));
  key.push_back(static_cast<char>(achieved));
  for (uint8_t b : v.raw()) key.push_back(static_cast<char>(b));
  return key;
}

// Slot name -> concrete value for one action invocation: slot i carries the
// argument bound to formal i.
std::vector<std::pair<std::string, std::string>> slot_bindings(
    const efsm::Efsm& m, const efsm::ActionRef& action,
    const TargetItem& target) {
  std::vector<std::pair<std::string, std::string>> bindings;
  const auto& fn = m.functions[action.function_index];
  for (size_t i = 0; i < action.slots.size() && i < fn.params.size(); ++i) {
    auto it = target.args.find(fn.params[i]);
    if (it != target.args.end()) bindings.emplace_back(action.slots[i], it->second);
  }
  return bindings;
}

ExecutionPath reconstruct(const efsm::Efsm& m, const TargetSequence& targets,
                          const std::vector<Node>& arena, int goal) {
  std::vector<int> edges;
  for (int at = goal; arena[at].parent >= 0; at = arena[at].parent) {
    edges.push_back(arena[at].via);
  }
  std::reverse(edges.begin(), edges.end());

  ExecutionPath path;
  path.app_id = m.app_id;
  efsm::Valuation valuation = m.initial_valuation();
  size_t achieved = 0;
  for (int ti : edges) {
    const auto& t = m.transitions[ti];
    PathStep step;
    step.transition_id = t.id;
    step.source = t.source;
    step.target = t.target;
    valuation = efsm::apply_update(t.update, valuation);
    step.valuation_after = valuation;
    if (t.action) {
      const TargetItem& item = targets.items[achieved];
      step.action = ActionCall{item.function, item.args};
      step.event_text = efsm::substitute_placeholders(
          t.event_text, slot_bindings(m, *t.action, item));
      ++achieved;
    } else {
      step.event_text = t.event_text;
    }
    path.steps.push_back(std::move(step));
  }
  return path;
}

}  // namespace

std::vector<Diagnostic> validate_targets(const efsm::Efsm& m,
                                         const TargetSequence& targets) {
  std::vector<Diagnostic> diags;
  for (const auto& item : targets.items) {
    const efsm::PrimaryFunction* fn = m.find_function(item.function);
    if (!fn) {
      diags.push_back({DiagCode::UNKNOWN_FUNCTION, Severity::Error,
                       "app '" + m.app_id + "' has no function '" +
                           item.function + "'",
                       item.function});
      continue;
    }
    for (const auto& formal : fn->params) {
      if (!item.args.count(formal)) {
        diags.push_back({DiagCode::DOMAIN_MISMATCH, Severity::Error,
                         "call to '" + item.function +
                             "' is missing argument '" + formal + "'",
                         item.function});
      }
    }
    for (const auto& [key, _] : item.args) {
      if (std::find(fn->params.begin(), fn->params.end(), key) ==
          fn->params.end()) {
        diags.push_back({DiagCode::DOMAIN_MISMATCH, Severity::Error,
                         "call to '" + item.function +
                             "' has unknown argument '" + key + "'",
                         item.function});
      }
    }
  }
  return diags;
}

SolveResult solve(const efsm::Efsm& m, const TargetSequence& targets,
                  const SolveOptions& options) {
  const uint64_t configurations = static_cast<uint64_t>(m.states.size()) *
                                  m.valuation_count() *
                                  (static_cast<uint64_t>(targets.size()) + 1);
  if (configurations > options.max_configurations) {
    throw ConfigSpaceExceeded(configurations, options.max_configurations);
  }

  std::vector<Node> arena;
  arena.push_back(Node{m.initial_index, m.initial_valuation(), 0, -1, -1});
  if (targets.empty()) {
    return ExecutionPath{m.app_id, {}};
  }

  std::unordered_map<std::string, int> visited;
  visited.emplace(node_key(arena[0].state, arena[0].valuation, 0), 0);
  std::deque<int> frontier{0};

  while (!frontier.empty()) {
    const int current = frontier.front();
    frontier.pop_front();

    for (size_t ti = 0; ti < m.transitions.size(); ++ti) {
      const auto& t = m.transitions[ti];
      const Node& node = arena[current];  // re-fetch: arena may reallocate
      if (t.source_index != node.state) continue;
      if (!efsm::eval_guard(t.guard, node.valuation)) continue;

      size_t achieved = node.achieved;
      if (t.action) {
        if (achieved >= targets.size()) continue;
        if (t.action->function != targets.items[achieved].function) continue;
        ++achieved;
      }

      efsm::Valuation next_valuation =
          efsm::apply_update(t.update, node.valuation);
      std::string key = node_key(t.target_index, next_valuation, achieved);
      if (visited.count(key)) continue;

      arena.push_back(Node{t.target_index, std::move(next_valuation), achieved,
                           current, static_cast<int>(ti)});
      const int produced = static_cast<int>(arena.size()) - 1;
      if (achieved == targets.size()) {
        return reconstruct(m, targets, arena, produced);
      }
      visited.emplace(std::move(key), produced);
      frontier.push_back(produced);
    }
  }
  return Infeasible{};
}

GlobalResult solve_all(const efsm::KnowledgeBase& kb,
                       const std::vector<IntentEntry>& entries,
                       const SolveOptions& options) {
  GlobalPath global;
  for (const auto& entry : entries) {
    const efsm::Efsm* machine = kb.find(entry.app_id);
    if (!machine) throw UnknownAppError(entry.app_id);
    SolveResult result = solve(*machine, entry.targets, options);
    if (std::holds_alternative<Infeasible>(result)) return Infeasible{};
    global.segments.push_back(std::get<ExecutionPath>(std::move(result)));
  }
  return global;
}

std::string format_path(const ExecutionPath& path) {
  if (path.steps.empty()) return "empty path (goal already satisfied)\n";
  std::ostringstream out;
  for (size_t i = 0; i < path.steps.size(); ++i) {
    const auto& step = path.steps[i];
    out << (i + 1) << ". " << step.transition_id << ": " << step.source
        << " -> " << step.target << " -- \"" << step.event_text << "\"";
    if (step.action) {
      out << " [" << step.action->function << "(";
      bool first = true;
      for (const auto& [key, value] : step.action->args) {
        if (!first) out << ", ";
        first = false;
        out << key << "=" << value;
      }
      out << ")]";
    }
    out << "\n";
  }
  return out.str();
}

std::string format_global(const GlobalPath& global) {
  std::string out;
  for (size_t i = 0; i < global.segments.size(); ++i) {
    if (i) out += "\n";
    out += "app " + global.segments[i].app_id + ":\n";
    out += format_path(global.segments[i]);
  }
  return out;
}

}  // namespace splanner::solver
