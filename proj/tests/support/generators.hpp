#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "splanner/efsm/model.hpp"
#include "splanner/efsm/raw.hpp"
#include "splanner/efsm/semantics.hpp"
#include "splanner/efsm/validate.hpp"
#include "splanner/intent/intent.hpp"
#include "splanner/sim/episode.hpp"
#include "splanner/solver/solve.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

inline size_t pick(Rng& rng, size_t n) { return rng() % n; }

inline bool chance(Rng& rng, int percent) {
  return static_cast<int>(rng() % 100) < percent;
}

struct GenOptions {
  int min_states = 2;
  int max_states = 6;
  int max_vars = 3;           // boolean unless allow_enums
  int max_transitions = 12;
  int max_functions = 3;
  int max_params = 2;
  bool allow_enums = false;   // enum vars for round-trip coverage
  bool unique_events = false; // distinct event text per transition
};

// Builds an unvalidated description that is valid by construction: every
// referenced state/var/function is declared, literals stay in domain,
// placeholders mirror action slots.
inline splanner::efsm::RawApp random_raw_app(Rng& rng, const GenOptions& opt,
                                             const std::string& app_id) {
  using namespace splanner::efsm;
  RawApp app;
  app.app_id = app_id;

  const int n_states =
      opt.min_states + static_cast<int>(pick(
                           rng, static_cast<size_t>(opt.max_states -
                                                    opt.min_states + 1)));
  for (int i = 0; i < n_states; ++i) {
    app.states.push_back("s" + std::to_string(i));
  }
  app.initial_states.push_back(app.states[0]);

  const int n_vars = static_cast<int>(pick(rng, opt.max_vars + 1));
  for (int i = 0; i < n_vars; ++i) {
    RawVar var;
    var.name = "v" + std::to_string(i);
    if (opt.allow_enums && chance(rng, 40)) {
      var.is_bool = false;
      const int n_values = 2 + static_cast<int>(pick(rng, 3));
      for (int v = 0; v < n_values; ++v) {
        var.enum_values.push_back("e" + std::to_string(v));
      }
      var.initial = var.enum_values[pick(rng, var.enum_values.size())];
    } else {
      var.is_bool = true;
      var.initial = chance(rng, 50) ? "true" : "false";
    }
    app.vars.push_back(std::move(var));
  }

  const int n_functions = static_cast<int>(pick(rng, opt.max_functions + 1));
  for (int i = 0; i < n_functions; ++i) {
    RawFunction fn;
    fn.name = "f" + std::to_string(i);
    const int n_params = static_cast<int>(pick(rng, opt.max_params + 1));
    for (int p = 0; p < n_params; ++p) {
      fn.params.push_back("p" + std::to_string(p));
    }
    if (chance(rng, 60)) fn.description = "Run function " + fn.name + ".";
    app.functions.push_back(std::move(fn));
  }

  auto domain_literal = [&](const RawVar& var) {
    if (var.is_bool) return std::string(chance(rng, 50) ? "true" : "false");
    return var.enum_values[pick(rng, var.enum_values.size())];
  };

  const int n_transitions =
      1 + static_cast<int>(pick(rng, static_cast<size_t>(opt.max_transitions)));
  for (int i = 0; i < n_transitions; ++i) {
    RawTransition t;
    t.id = "t" + std::to_string(i);
    t.source = app.states[pick(rng, app.states.size())];
    t.target = app.states[pick(rng, app.states.size())];

    if (!app.vars.empty()) {
      const int n_atoms = static_cast<int>(pick(rng, 3));
      for (int a = 0; a < n_atoms; ++a) {
        const RawVar& var = app.vars[pick(rng, app.vars.size())];
        t.guard.push_back({var.name, chance(rng, 75), domain_literal(var)});
      }
      const int n_assigns = static_cast<int>(pick(rng, 3));
      for (int a = 0; a < n_assigns; ++a) {
        const RawVar& var = app.vars[pick(rng, app.vars.size())];
        bool already = false;
        for (const auto& existing : t.update) {
          if (existing.var == var.name) already = true;
        }
        if (already) continue;
        t.update.push_back({var.name, domain_literal(var)});
      }
    }

    std::string placeholder_suffix;
    if (!app.functions.empty() && chance(rng, 45)) {
      const RawFunction& fn = app.functions[pick(rng, app.functions.size())];
      RawAction action;
      action.function = fn.name;
      for (const auto& param : fn.params) {
        placeholder_suffix += " {" + param + "}";
      }
      t.action = std::move(action);
    }
    t.event_text = opt.unique_events
                       ? app_id + " event " + std::to_string(i) + "." +
                             placeholder_suffix
                       : "Do step " + std::to_string(pick(rng, 4)) + "." +
                             placeholder_suffix;
    app.transitions.push_back(std::move(t));
  }
  return app;
}

inline splanner::efsm::Efsm validated_or_throw(
    const splanner::efsm::RawApp& raw) {
  auto result = splanner::efsm::validate_efsm(raw);
  if (!result.machine) {
    std::string detail;
    for (const auto& d : result.diagnostics) {
      detail += splanner::format_diagnostic(d) + "\n";
    }
    throw std::runtime_error("generated model failed validation:\n" + detail);
  }
  return std::move(*result.machine);
}

inline splanner::efsm::Efsm random_efsm(Rng& rng, const GenOptions& opt = {},
                                        const std::string& app_id = "gen") {
  return validated_or_throw(random_raw_app(rng, opt, app_id));
}

// Random target sequence over the machine's functions (empty when it has
// none); argument values are distinct non-keyword tokens.
inline splanner::solver::TargetSequence random_targets(
    Rng& rng, const splanner::efsm::Efsm& machine, int max_targets) {
  splanner::solver::TargetSequence targets;
  if (machine.functions.empty() || max_targets <= 0) return targets;
  const int count = static_cast<int>(pick(rng, max_targets + 1));
  for (int i = 0; i < count; ++i) {
    const auto& fn = machine.functions[pick(rng, machine.functions.size())];
    splanner::solver::TargetItem item;
    item.function = fn.name;
    for (const auto& param : fn.params) {
      item.args[param] = "arg" + std::to_string(pick(rng, 90) + 10);
    }
    targets.items.push_back(std::move(item));
  }
  return targets;
}

// One generated closed-loop task: instruction + lexicon that parse back to
// `targets`, with a random walk as the feasibility witness.
struct GeneratedTask {
  splanner::efsm::Efsm machine;
  std::string instruction;
  std::string lexicon_text;
  splanner::solver::TargetSequence targets;
  splanner::sim::GoalSpec goal;
};

// Lexicon rule per function: "run <fn> [<param> {param}]... end". Keywords
// bound the capture slots on both sides, so values never bleed.
inline std::string task_lexicon_text(const splanner::efsm::Efsm& machine) {
  std::string out;
  for (const auto& fn : machine.functions) {
    std::string pattern = "run " + fn.name;
    for (const auto& param : fn.params) {
      pattern += " " + param + " {" + param + "}";
    }
    pattern += " end";
    out += pattern + "\t" + machine.app_id + "." + fn.name + "\n";
  }
  return out;
}

inline std::string task_phrase(const splanner::solver::TargetItem& item) {
  std::string phrase = "run " + item.function;
  for (const auto& [param, value] : item.args) {
    phrase += " " + param + " " + value;
  }
  phrase += " end";
  return phrase;
}

// Random walk from the initial configuration; traversed action transitions
// define the target sequence (capped), so the walk itself witnesses that the
// targets are feasible in order.
inline std::optional<GeneratedTask> random_feasible_task(
    Rng& rng, splanner::efsm::Efsm machine, int max_targets = 2,
    int max_walk = 10) {
  using namespace splanner;

  for (int attempt = 0; attempt < 40; ++attempt) {
    efsm::Configuration config = efsm::initial_configuration(machine);
    solver::TargetSequence targets;
    int arg_counter = 0;

    const int walk_len = 1 + static_cast<int>(pick(rng, max_walk));
    for (int step = 0; step < walk_len; ++step) {
      std::vector<const efsm::Transition*> applicable;
      for (const auto& t : machine.transitions) {
        if (t.source_index != config.state_index) continue;
        if (!efsm::eval_guard(t.guard, config.valuation)) continue;
        if (t.action && static_cast<int>(targets.items.size()) >= max_targets)
          continue;
        applicable.push_back(&t);
      }
      if (applicable.empty()) break;
      const efsm::Transition* t = applicable[pick(rng, applicable.size())];
      if (t->action) {
        const auto& fn = machine.functions[t->action->function_index];
        solver::TargetItem item;
        item.function = fn.name;
        for (const auto& param : fn.params) {
          item.args[param] = "val" + std::to_string(arg_counter++);
        }
        targets.items.push_back(std::move(item));
      }
      config.valuation = efsm::apply_update(t->update, config.valuation);
      config.state_index = t->target_index;
    }
    if (targets.items.empty()) continue;

    GeneratedTask task;
    task.lexicon_text = task_lexicon_text(machine);
    for (size_t i = 0; i < targets.items.size(); ++i) {
      if (i) task.instruction += " ";
      task.instruction += task_phrase(targets.items[i]);
    }
    for (const auto& item : targets.items) {
      task.goal.items.push_back({machine.app_id, item.function, item.args});
    }
    task.targets = std::move(targets);
    task.machine = std::move(machine);
    return task;
  }
  return std::nullopt;
}

}  // namespace testsupport
