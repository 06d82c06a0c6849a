#include "splanner/plan/plan.hpp"

#include <cctype>
#include <sstream>

namespace splanner::plan {

namespace {

size_t total_steps(const solver::GlobalPath& path) {
  size_t count = 0;
  for (const auto& segment : path.segments) count += segment.steps.size();
  return count;
}

// Parses "N. text" lines from a polish reply; empty result means the reply
// was not a plain numbered list.
std::vector<std::string> parse_numbered_lines(const std::string& reply,
                                              std::string& error) {
  std::vector<std::string> steps;
  std::istringstream in(reply);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    size_t digits = begin;
    while (digits < line.size() &&
           std::isdigit(static_cast<unsigned char>(line[digits]))) {
      ++digits;
    }
    if (digits == begin || digits >= line.size() || line[digits] != '.') {
      error = "line is not a numbered step: '" + line.substr(begin) + "'";
      return {};
    }
    if (digits - begin > 6) {
      error = "implausible step number";
      return {};
    }
    int number = std::stoi(line.substr(begin, digits - begin));
    if (number != static_cast<int>(steps.size()) + 1) {
      error = "step numbering is not contiguous from 1";
      return {};
    }
    size_t text_begin = line.find_first_not_of(" \t", digits + 1);
    if (text_begin == std::string::npos) {
      error = "step " + std::to_string(number) + " is empty";
      return {};
    }
    size_t text_end = line.find_last_not_of(" \t");
    steps.push_back(line.substr(text_begin, text_end - text_begin + 1));
  }
  if (steps.empty()) error = "reply contained no numbered steps";
  return steps;
}

}  // namespace

std::string app_switch_text(const std::string& app_id) {
  return "Open the " + app_id + " application.";
}

Plan render_template(const solver::GlobalPath& path,
                     const intent::Instruction& instruction) {
  Plan plan;
  plan.preamble = "Task: " + instruction.text;
  const bool any_steps = total_steps(path) > 0;
  for (size_t seg = 0; seg < path.segments.size(); ++seg) {
    if (seg > 0 || any_steps) {
      plan.steps.push_back({app_switch_text(path.segments[seg].app_id),
                            {ProvenanceKind::AppSwitch, seg, 0}});
    }
    for (size_t i = 0; i < path.segments[seg].steps.size(); ++i) {
      plan.steps.push_back({path.segments[seg].steps[i].event_text,
                            {ProvenanceKind::Path, seg, i}});
    }
  }
  return plan;
}

Plan render_fallback() {
  Plan plan;
  plan.fallback = true;
  plan.steps.push_back({kFallbackMessage, {ProvenanceKind::Fallback, 0, 0}});
  return plan;
}

std::string to_text(const Plan& plan) {
  std::string out;
  if (!plan.preamble.empty()) {
    out += plan.preamble;
    out += "\n\n";
  }
  for (size_t i = 0; i < plan.steps.size(); ++i) {
    out += std::to_string(i + 1) + ". " + plan.steps[i].text + "\n";
  }
  return out;
}

std::vector<gateway::Message> polish_messages(
    const Plan& draft, const intent::Instruction& instruction) {
  std::string system =
      "You polish step-by-step phone operation plans. Rewrite the given "
      "numbered plan so it is concise, actionable, and easy to follow. Keep "
      "every operation; you may add at most two clarifying steps. Reply with "
      "numbered lines only, in the form `1. <step>`, nothing else.";
  std::string user = "Instruction: " + instruction.text + "\nDraft plan:\n";
  for (size_t i = 0; i < draft.steps.size(); ++i) {
    user += std::to_string(i + 1) + ". " + draft.steps[i].text + "\n";
  }
  return {{"system", system}, {"user", user}};
}

Plan polish_llm(const Plan& draft, const intent::Instruction& instruction,
                gateway::Gateway& gw) {
  if (draft.fallback) return draft;

  gateway::Reply reply = gw.complete(polish_messages(draft, instruction));
  if (!gateway::ok(reply)) {
    Plan out = draft;
    out.notes.push_back(
        std::string("POLISH_SKIPPED: ") +
        gateway::to_string(std::get<gateway::GatewayError>(reply).kind));
    return out;
  }

  std::string error;
  std::vector<std::string> steps =
      parse_numbered_lines(std::get<std::string>(reply), error);

  auto reject = [&](const std::string& reason) {
    Plan out = draft;
    out.notes.push_back("POLISH_REJECTED: " + reason);
    return out;
  };

  if (steps.empty()) return reject(error);
  if (steps.size() < draft.steps.size() ||
      steps.size() > draft.steps.size() + 2) {
    return reject("step count " + std::to_string(steps.size()) +
                  " outside [" + std::to_string(draft.steps.size()) + ", " +
                  std::to_string(draft.steps.size() + 2) + "]");
  }
  for (const auto& step : steps) {
    if (step.find('{') != std::string::npos ||
        step.find('}') != std::string::npos) {
      return reject("step contains placeholder syntax: '" + step + "'");
    }
  }

  Plan out;
  out.preamble = draft.preamble;
  for (const auto& text : steps) {
    out.steps.push_back({text, {ProvenanceKind::Polished, 0, 0}});
  }
  return out;
}

}  // namespace splanner::plan
