#include "splanner/sim/device.hpp"

#include <stdexcept>

#include "splanner/gateway/gateway.hpp"  // fnv1a64

namespace splanner::sim {

DeviceAction click(const std::string& widget_id) {
  DeviceAction a;
  a.kind = DeviceAction::Kind::Click;
  a.widget_id = widget_id;
  return a;
}

DeviceAction long_press(const std::string& widget_id) {
  DeviceAction a;
  a.kind = DeviceAction::Kind::LongPress;
  a.widget_id = widget_id;
  return a;
}

DeviceAction input_text(const std::string& widget_id, const std::string& text) {
  DeviceAction a;
  a.kind = DeviceAction::Kind::InputText;
  a.widget_id = widget_id;
  a.text = text;
  return a;
}

DeviceAction swipe(const std::string& direction) {
  DeviceAction a;
  a.kind = DeviceAction::Kind::Swipe;
  a.direction = direction;
  return a;
}

DeviceAction open_app(const std::string& app_id) {
  DeviceAction a;
  a.kind = DeviceAction::Kind::OpenApp;
  a.app_id = app_id;
  return a;
}

DeviceAction status_complete() {
  DeviceAction a;
  a.kind = DeviceAction::Kind::Status;
  a.complete = true;
  return a;
}

DeviceAction status_infeasible() {
  DeviceAction a;
  a.kind = DeviceAction::Kind::Status;
  a.complete = false;
  return a;
}

std::string to_string(const DeviceAction& action) {
  switch (action.kind) {
    case DeviceAction::Kind::Click:
      return "click " + action.widget_id;
    case DeviceAction::Kind::LongPress:
      return "long_press " + action.widget_id;
    case DeviceAction::Kind::InputText:
      return "input_text " + action.widget_id + " " + action.text;
    case DeviceAction::Kind::Swipe:
      return "swipe " + action.direction;
    case DeviceAction::Kind::OpenApp:
      return "open_app " + action.app_id;
    case DeviceAction::Kind::Status:
      return std::string("status ") +
             (action.complete ? "complete" : "infeasible");
  }
  return "unknown";
}

std::string observation_digest(const Observation& obs) {
  std::string canonical = obs.app_id + "\x1f" + obs.state + "\x1f" +
                          (obs.home ? "h" : "-") + (obs.error ? "e" : "-") +
                          (obs.terminal ? "t" : "-") + "\x1f" +
                          obs.error_reason;
  for (const auto& w : obs.widgets) {
    canonical += "\x1f" + w.id + "=" + w.label;
  }
  uint64_t hash = gateway::fnv1a64(canonical);
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

DeviceEnvironment::DeviceEnvironment(efsm::KnowledgeBase kb)
    : kb_(std::move(kb)) {
  reset();
}

Observation DeviceEnvironment::reset() {
  app_states_.clear();
  for (const auto& machine : kb_.machines()) {
    app_states_.push_back({machine.initial_index, machine.initial_valuation()});
  }
  foreground_ = -1;
  step_index_ = 0;
  terminal_ = false;
  invoked_.clear();
  return observe();
}

Observation DeviceEnvironment::observe() const {
  Observation obs;
  obs.step_index = step_index_;
  obs.terminal = terminal_;
  if (foreground_ < 0) return obs;

  const efsm::Efsm& machine = kb_.machines()[foreground_];
  const AppState& app = app_states_[foreground_];
  obs.home = false;
  obs.app_id = machine.app_id;
  obs.state = machine.states[app.state_index];
  for (size_t ti = 0; ti < machine.transitions.size(); ++ti) {
    const auto& t = machine.transitions[ti];
    if (t.source_index != app.state_index) continue;
    if (!efsm::eval_guard(t.guard, app.valuation)) continue;
    Widget w;
    w.id = "w" + std::to_string(ti);
    w.label = t.event_text;
    w.transition_index = ti;
    w.placeholders = efsm::extract_placeholders(t.event_text);
    obs.widgets.push_back(std::move(w));
  }
  return obs;
}

Observation DeviceEnvironment::fail(const std::string& reason) {
  Observation obs = observe();
  obs.error = true;
  obs.error_reason = reason;
  return obs;
}

namespace {

// Binds an input_text payload to the fired function's formals. Payload is
// either `key=value` pairs (keys may be slot or formal names, values may be
// double-quoted) or, for a single-formal function, the bare value.
std::map<std::string, std::string> bind_args(
    const efsm::Efsm& machine, const efsm::Transition& t,
    const std::string& payload) {
  const auto& fn = machine.functions[t.action->function_index];
  std::map<std::string, std::string> args;
  if (fn.params.empty()) return args;

  std::map<std::string, std::string> pairs;
  bool all_pairs = !payload.empty();
  size_t i = 0;
  const size_t n = payload.size();
  while (i < n && all_pairs) {
    while (i < n && payload[i] == ' ') ++i;
    if (i >= n) break;
    size_t eq = payload.find('=', i);
    size_t space = payload.find(' ', i);
    if (eq == std::string::npos || eq == i ||
        (space != std::string::npos && space < eq)) {
      all_pairs = false;
      break;
    }
    std::string key = payload.substr(i, eq - i);
    i = eq + 1;
    std::string value;
    if (i < n && payload[i] == '"') {
      ++i;
      while (i < n && payload[i] != '"') value += payload[i++];
      if (i >= n) {
        all_pairs = false;
        break;
      }
      ++i;
    } else {
      while (i < n && payload[i] != ' ') value += payload[i++];
    }
    pairs[key] = value;
  }

  if (all_pairs && !pairs.empty()) {
    for (size_t p = 0; p < fn.params.size(); ++p) {
      const std::string& formal = fn.params[p];
      const std::string& slot =
          p < t.action->slots.size() ? t.action->slots[p] : formal;
      auto by_slot = pairs.find(slot);
      if (by_slot != pairs.end()) {
        args[formal] = by_slot->second;
        continue;
      }
      auto by_formal = pairs.find(formal);
      if (by_formal != pairs.end()) args[formal] = by_formal->second;
    }
    return args;
  }
  if (fn.params.size() == 1 && !payload.empty()) {
    args[fn.params[0]] = payload;
  }
  return args;
}

}  // namespace

Observation DeviceEnvironment::fire(const DeviceAction& action) {
  if (foreground_ < 0) return fail("NO_FOREGROUND_APP");

  const efsm::Efsm& machine = kb_.machines()[foreground_];
  AppState& app = app_states_[foreground_];

  Observation current = observe();
  const Widget* widget = nullptr;
  for (const auto& w : current.widgets) {
    if (w.id == action.widget_id) widget = &w;
  }
  if (!widget) return fail("no widget '" + action.widget_id + "' on screen");

  const efsm::Transition& t = machine.transitions[widget->transition_index];
  if (t.source_index != app.state_index ||
      !efsm::eval_guard(t.guard, app.valuation)) {
    return fail("widget '" + action.widget_id + "' is no longer applicable");
  }

  app.valuation = efsm::apply_update(t.update, app.valuation);
  app.state_index = t.target_index;
  if (t.action) {
    InvokedFunction call;
    call.app_id = machine.app_id;
    call.function = t.action->function;
    call.args = bind_args(machine, t,
                          action.kind == DeviceAction::Kind::InputText
                              ? action.text
                              : std::string());
    invoked_.push_back(std::move(call));
  }
  return observe();
}

Observation DeviceEnvironment::step(const DeviceAction& action) {
  if (terminal_) {
    throw std::logic_error("env_step after episode terminated");
  }
  ++step_index_;

  switch (action.kind) {
    case DeviceAction::Kind::OpenApp: {
      const efsm::Efsm* machine = kb_.find(action.app_id);
      if (!machine) return fail("no app '" + action.app_id + "' installed");
      for (size_t i = 0; i < kb_.machines().size(); ++i) {
        if (kb_.machines()[i].app_id == action.app_id) {
          foreground_ = static_cast<int>(i);
        }
      }
      return observe();
    }
    case DeviceAction::Kind::Click:
    case DeviceAction::Kind::LongPress:
    case DeviceAction::Kind::InputText:
      return fire(action);
    case DeviceAction::Kind::Swipe:
      return observe();
    case DeviceAction::Kind::Status:
      terminal_ = true;
      return observe();
  }
  return fail("unknown action kind");
}

}  // namespace splanner::sim
