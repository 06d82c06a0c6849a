#include "splanner/sim/episode.hpp"

#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace splanner::sim {

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success: return "success";
    case Outcome::StepLimit: return "step_limit";
    case Outcome::ExecutorDeclaredInfeasible:
      return "executor_declared_infeasible";
    case Outcome::EnvironmentError: return "environment_error";
  }
  return "environment_error";
}

Episode run_episode(DeviceEnvironment& env, Executor& executor,
                    const intent::Instruction& instruction,
                    const plan::Plan& plan, int step_limit) {
  Episode episode;
  episode.instruction = instruction.text;
  episode.plan = plan;
  episode.step_limit = step_limit;

  Observation obs = env.reset();
  while (true) {
    if (static_cast<int>(episode.history.size()) >= step_limit) {
      episode.outcome = Outcome::StepLimit;
      break;
    }
    DeviceAction action;
    try {
      action = executor.next_action(instruction, obs, plan, episode.history);
    } catch (...) {
      episode.outcome = Outcome::ExecutorDeclaredInfeasible;
      break;
    }
    Observation next;
    try {
      next = env.step(action);
    } catch (...) {
      episode.outcome = Outcome::EnvironmentError;
      break;
    }
    episode.history.push_back(
        {next.step_index, action, observation_digest(next)});
    obs = next;
    if (action.kind == DeviceAction::Kind::Status) {
      episode.outcome = action.complete ? Outcome::Success
                                        : Outcome::ExecutorDeclaredInfeasible;
      break;
    }
  }

  episode.invoked = env.invoked();
  for (const auto& entry : episode.history) {
    if (entry.action.kind != DeviceAction::Kind::Status) ++episode.steps_taken;
  }
  return episode;
}

namespace {

// "Open the camera application." -> "camera"; empty when the text is not an
// app-switch step.
std::string app_switch_target(const std::string& text) {
  const std::string prefix = "Open the ";
  const std::string suffix = " application.";
  if (text.size() <= prefix.size() + suffix.size()) return "";
  if (text.compare(0, prefix.size(), prefix) != 0) return "";
  if (text.compare(text.size() - suffix.size(), suffix.size(), suffix) != 0)
    return "";
  return text.substr(prefix.size(),
                     text.size() - prefix.size() - suffix.size());
}

// Aligns `text` against a widget label template, capturing the placeholder
// spans. "Record a video of {duration}." matches "Record a video of 5s."
// with duration=5s.
bool match_template(const std::string& tmpl, const std::string& text,
                    std::vector<std::pair<std::string, std::string>>& captures) {
  captures.clear();
  size_t ti = 0;  // position in tmpl
  size_t pos = 0; // position in text
  while (ti < tmpl.size()) {
    size_t brace = tmpl.find('{', ti);
    std::string literal = tmpl.substr(ti, brace == std::string::npos
                                              ? std::string::npos
                                              : brace - ti);
    if (text.compare(pos, literal.size(), literal) != 0) return false;
    pos += literal.size();
    if (brace == std::string::npos) {
      ti = tmpl.size();
      break;
    }
    size_t close = tmpl.find('}', brace);
    if (close == std::string::npos) return false;
    std::string slot = tmpl.substr(brace + 1, close - brace - 1);
    ti = close + 1;

    size_t next_literal_end = tmpl.find('{', ti);
    std::string next_literal = tmpl.substr(
        ti, next_literal_end == std::string::npos ? std::string::npos
                                                  : next_literal_end - ti);
    size_t capture_end;
    if (next_literal.empty()) {
      capture_end = text.size();
    } else {
      capture_end = text.find(next_literal, pos + 1);
      if (capture_end == std::string::npos) return false;
    }
    if (capture_end <= pos) return false;
    captures.emplace_back(slot, text.substr(pos, capture_end - pos));
    pos = capture_end;
  }
  return pos == text.size();
}

std::string payload_from_captures(
    const std::vector<std::pair<std::string, std::string>>& captures) {
  if (captures.size() == 1) return captures[0].second;
  std::string payload;
  for (const auto& [slot, value] : captures) {
    if (!payload.empty()) payload += ' ';
    payload += slot + "=";
    if (value.find(' ') != std::string::npos) {
      payload += '"' + value + '"';
    } else {
      payload += value;
    }
  }
  return payload;
}

}  // namespace

DeviceAction OracleExecutor::next_action(
    const intent::Instruction&, const Observation& obs, const plan::Plan& plan,
    const std::vector<HistoryEntry>& history) {
  if (plan.fallback) return status_infeasible();

  const size_t cursor = history.size();
  if (cursor >= plan.steps.size()) return status_complete();
  const std::string& text = plan.steps[cursor].text;

  std::string app = app_switch_target(text);
  if (!app.empty()) return open_app(app);

  for (const auto& widget : obs.widgets) {
    if (widget.placeholders.empty() && widget.label == text) {
      return click(widget.id);
    }
  }
  for (const auto& widget : obs.widgets) {
    if (widget.placeholders.empty()) continue;
    std::vector<std::pair<std::string, std::string>> captures;
    if (match_template(widget.label, text, captures)) {
      return input_text(widget.id, payload_from_captures(captures));
    }
  }
  return status_infeasible();
}

std::vector<gateway::Message> executor_messages(
    const intent::Instruction& instruction, const Observation& obs,
    const plan::Plan& plan, const std::vector<HistoryEntry>& history) {
  std::string system =
      "You operate a phone one action at a time, following a plan.\n"
      "Available action kinds:\n"
      "  click <widget_id>\n"
      "  long_press <widget_id>\n"
      "  input_text <widget_id> <text>\n"
      "  swipe <up|down|left|right>\n"
      "  open_app <app_id>\n"
      "  status <complete|infeasible>\n"
      "Reason briefly about which plan step is next and how the current "
      "screen serves it, then end your reply with exactly one line:\n"
      "ACTION <kind> [args]";

  std::ostringstream user;
  user << "Instruction: " << instruction.text << "\n";
  user << "Plan:\n";
  for (size_t i = 0; i < plan.steps.size(); ++i) {
    user << (i + 1) << ". " << plan.steps[i].text << "\n";
  }
  user << "Screen: ";
  if (obs.home) {
    user << "home screen (no app open)\n";
  } else {
    user << "app=" << obs.app_id << " state=" << obs.state << "\n";
  }
  user << "Widgets:\n";
  if (obs.widgets.empty()) {
    user << "  (none)\n";
  } else {
    for (const auto& w : obs.widgets) {
      user << "  " << w.id << ": " << w.label << "\n";
    }
  }
  user << "History:\n";
  if (history.empty()) {
    user << "  (none)\n";
  } else {
    for (const auto& entry : history) {
      user << "  " << entry.step_index << ". " << to_string(entry.action)
           << "\n";
    }
  }
  user << "What is the next action?";
  return {{"system", system}, {"user", user.str()}};
}

std::optional<DeviceAction> parse_action_reply(const std::string& reply,
                                               const Observation& obs,
                                               std::string& error) {
  std::string last_line;
  std::istringstream in(reply);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    size_t end = line.find_last_not_of(" \t");
    last_line = line.substr(begin, end - begin + 1);
  }
  if (last_line.rfind("ACTION ", 0) != 0) {
    error = "reply does not end with an ACTION line";
    return std::nullopt;
  }

  std::istringstream tokens(last_line.substr(7));
  std::string kind;
  tokens >> kind;

  auto require_widget = [&](const std::string& id) {
    for (const auto& w : obs.widgets) {
      if (w.id == id) return true;
    }
    error = "no widget '" + id + "' on the current screen";
    return false;
  };

  if (kind == "click" || kind == "long_press") {
    std::string id;
    tokens >> id;
    if (id.empty()) {
      error = kind + " needs a widget id";
      return std::nullopt;
    }
    if (!require_widget(id)) return std::nullopt;
    return kind == "click" ? click(id) : long_press(id);
  }
  if (kind == "input_text") {
    std::string id;
    tokens >> id;
    if (id.empty()) {
      error = "input_text needs a widget id";
      return std::nullopt;
    }
    if (!require_widget(id)) return std::nullopt;
    std::string text;
    std::getline(tokens, text);
    size_t begin = text.find_first_not_of(' ');
    text = begin == std::string::npos ? "" : text.substr(begin);
    return input_text(id, text);
  }
  if (kind == "swipe") {
    std::string direction;
    tokens >> direction;
    if (direction != "up" && direction != "down" && direction != "left" &&
        direction != "right") {
      error = "swipe needs a direction (up/down/left/right)";
      return std::nullopt;
    }
    return swipe(direction);
  }
  if (kind == "open_app") {
    std::string app;
    tokens >> app;
    if (app.empty()) {
      error = "open_app needs an app id";
      return std::nullopt;
    }
    return open_app(app);
  }
  if (kind == "status") {
    std::string which;
    tokens >> which;
    if (which == "complete") return status_complete();
    if (which == "infeasible") return status_infeasible();
    error = "status must be complete or infeasible";
    return std::nullopt;
  }
  error = "unknown action kind '" + kind + "'";
  return std::nullopt;
}

DeviceAction VlmExecutor::next_action(
    const intent::Instruction& instruction, const Observation& obs,
    const plan::Plan& plan, const std::vector<HistoryEntry>& history) {
  std::vector<gateway::Message> messages =
      executor_messages(instruction, obs, plan, history);
  gateway::Reply reply = gw_.complete(messages);
  if (!gateway::ok(reply)) return status_infeasible();

  std::string error;
  auto action = parse_action_reply(std::get<std::string>(reply), obs, error);
  if (action) return *action;

  std::vector<gateway::Message> repair = messages;
  repair.push_back({"assistant", std::get<std::string>(reply)});
  repair.push_back({"user", "Invalid action: " + error +
                                "\nReply again; the last line must be "
                                "`ACTION <kind> [args]` for the current "
                                "screen."});
  gateway::Reply second = gw_.complete(repair);
  if (!gateway::ok(second)) return status_infeasible();
  action = parse_action_reply(std::get<std::string>(second), obs, error);
  return action ? *action : status_infeasible();
}

bool check_goal(const Episode& episode, const GoalSpec& goal) {
  if (episode.outcome != Outcome::Success) return false;
  size_t next = 0;
  for (const auto& call : episode.invoked) {
    if (next >= goal.items.size()) break;
    const GoalItem& want = goal.items[next];
    if (call.app_id == want.app_id && call.function == want.function &&
        call.args == want.args) {
      ++next;
    }
  }
  return next == goal.items.size();
}

std::vector<std::string> trace_lines(const Episode& episode) {
  std::vector<std::string> lines;
  {
    json record;
    record["event"] = "reset";
    record["instruction"] = episode.instruction;
    record["plan_steps"] = episode.plan.steps.size();
    record["fallback"] = episode.plan.fallback;
    lines.push_back(record.dump());
  }
  for (const auto& entry : episode.history) {
    json record;
    record["event"] = "action";
    record["step"] = entry.step_index;
    record["action"] = to_string(entry.action);
    record["observation"] = entry.observation_digest;
    lines.push_back(record.dump());
  }
  {
    json record;
    record["event"] = "outcome";
    record["outcome"] = to_string(episode.outcome);
    record["steps"] = episode.steps_taken;
    record["invoked"] = json::array();
    for (const auto& call : episode.invoked) {
      json c;
      c["app"] = call.app_id;
      c["function"] = call.function;
      c["args"] = call.args;
      record["invoked"].push_back(c);
    }
    lines.push_back(record.dump());
  }
  return lines;
}

}  // namespace splanner::sim
