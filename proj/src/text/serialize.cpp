#include "splanner/text/serialize.hpp"

#include <sstream>

namespace splanner::text {

namespace {

void write_var(std::ostringstream& out, const efsm::VarDecl& var) {
  out << "    " << var.name << ": ";
  if (var.is_bool) {
    out << "bool";
  } else {
    out << "enum(";
    for (size_t i = 0; i < var.domain.size(); ++i) {
      if (i) out << ", ";
      out << var.domain[i];
    }
    out << ")";
  }
  out << " = " << var.initial() << "\n";
}

void write_function(std::ostringstream& out, const efsm::PrimaryFunction& fn) {
  out << "    " << fn.name;
  if (!fn.params.empty()) {
    out << "(";
    for (size_t i = 0; i < fn.params.size(); ++i) {
      if (i) out << ", ";
      out << fn.params[i];
    }
    out << ")";
  }
  if (!fn.description.empty()) out << ": " << quote(fn.description);
  out << "\n";
}

void write_transition(std::ostringstream& out, const efsm::Transition& t) {
  out << "    " << t.id << ": " << t.source << " -> " << t.target << " on "
      << quote(t.event_text);
  for (size_t i = 0; i < t.guard.atoms.size(); ++i) {
    const auto& atom = t.guard.atoms[i];
    out << (i == 0 ? " when " : " and ") << atom.var
        << (atom.equals ? " == " : " != ") << atom.literal;
  }
  for (size_t i = 0; i < t.update.assignments.size(); ++i) {
    const auto& a = t.update.assignments[i];
    out << (i == 0 ? " set " : ", ") << a.var << " = " << a.literal;
  }
  if (t.action) {
    out << " does " << t.action->function;
    if (!t.action->slots.empty()) {
      out << "(";
      for (size_t i = 0; i < t.action->slots.size(); ++i) {
        if (i) out << ", ";
        out << t.action->slots[i];
      }
      out << ")";
    }
  }
  out << "\n";
}

}  // namespace

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string serialize_app(const efsm::Efsm& machine) {
  std::ostringstream out;
  out << "app " << quote(machine.app_id) << " {\n";

  if (!machine.vars.empty()) {
    out << "  vars {\n";
    for (const auto& var : machine.vars) write_var(out, var);
    out << "  }\n";
  }

  out << "  states { ";
  for (size_t i = 0; i < machine.states.size(); ++i) {
    if (i) out << ", ";
    out << machine.states[i];
    if (static_cast<int>(i) == machine.initial_index) out << "*";
  }
  out << " }\n";

  if (!machine.functions.empty()) {
    out << "  functions {\n";
    for (const auto& fn : machine.functions) write_function(out, fn);
    out << "  }\n";
  }

  out << "  transitions {\n";
  for (const auto& t : machine.transitions) write_transition(out, t);
  out << "  }\n";

  out << "}\n";
  return out.str();
}

std::string serialize_model(const efsm::KnowledgeBase& kb) {
  std::string out;
  for (size_t i = 0; i < kb.machines().size(); ++i) {
    if (i) out += "\n";
    out += serialize_app(kb.machines()[i]);
  }
  return out;
}

}  // namespace splanner::text
