#pragma once

#include <map>
#include <string>
#include <vector>

#include "splanner/efsm/model.hpp"
#include "splanner/efsm/semantics.hpp"

namespace splanner::sim {

struct DeviceAction {
  enum class Kind { Click, LongPress, InputText, Swipe, OpenApp, Status };

  Kind kind = Kind::Click;
  std::string widget_id;   // click / long_press / input_text
  std::string text;        // input_text payload
  std::string direction;   // swipe
  std::string app_id;      // open_app
  bool complete = false;   // status: true = complete, false = infeasible

  bool operator==(const DeviceAction&) const = default;
};

DeviceAction click(const std::string& widget_id);
DeviceAction long_press(const std::string& widget_id);
DeviceAction input_text(const std::string& widget_id, const std::string& text);
DeviceAction swipe(const std::string& direction);
DeviceAction open_app(const std::string& app_id);
DeviceAction status_complete();
DeviceAction status_infeasible();

// One-line rendering, e.g. "click w3" or "status complete"; used in traces
// and executor prompts.
std::string to_string(const DeviceAction& action);

// One firable transition exposed to the executor. The label is the event
// text as written in the model; parameterized transitions keep their
// {placeholder} markers and are fired with input_text carrying the values.
struct Widget {
  std::string id;  // "w" + transition index within the app
  std::string label;
  size_t transition_index = 0;
  std::vector<std::string> placeholders;

  bool operator==(const Widget&) const = default;
};

struct Observation {
  std::string app_id;  // empty when on the home screen
  std::string state;
  std::vector<Widget> widgets;
  int step_index = 0;
  bool home = true;
  bool error = false;
  std::string error_reason;
  bool terminal = false;

  bool operator==(const Observation&) const = default;
};

// FNV-1a over screen identity (app, state, flags, widget ids + labels).
std::string observation_digest(const Observation& obs);

struct InvokedFunction {
  std::string app_id;
  std::string function;
  std::map<std::string, std::string> args;

  bool operator==(const InvokedFunction&) const = default;
};

// Ground-truth device: every app is an EFSM instance, the screen is the set
// of transitions applicable in the foreground app's current configuration.
class DeviceEnvironment {
 public:
  explicit DeviceEnvironment(efsm::KnowledgeBase kb);

  Observation reset();
  // Applies one action. Invalid actions set the error flag on the returned
  // observation and leave configurations unchanged. Throws std::logic_error
  // when called after a status action terminated the episode.
  Observation step(const DeviceAction& action);
  Observation observe() const;

  const std::vector<InvokedFunction>& invoked() const { return invoked_; }
  bool terminal() const { return terminal_; }

 private:
  struct AppState {
    int state_index = 0;
    efsm::Valuation valuation;
  };

  Observation fail(const std::string& reason);
  Observation fire(const DeviceAction& action);

  efsm::KnowledgeBase kb_;
  std::vector<AppState> app_states_;
  int foreground_ = -1;
  int step_index_ = 0;
  bool terminal_ = false;
  std::vector<InvokedFunction> invoked_;
};

}  // namespace splanner::sim
