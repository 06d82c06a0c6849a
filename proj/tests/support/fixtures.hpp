#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "splanner/efsm/validate.hpp"
#include "splanner/text/parse.hpp"

namespace testsupport {

inline std::string source_dir() { return SPLANNER_SOURCE_DIR; }
inline std::string cli_path() { return SPLANNER_CLI_PATH; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

// Parses + validates model text, throwing on any error; for fixtures that
// are known-good by construction.
inline splanner::efsm::KnowledgeBase kb_from_text(const std::string& text) {
  auto parsed = splanner::text::parse_model(text, "<test>");
  if (!parsed.document) {
    std::string detail;
    for (const auto& d : parsed.diagnostics) {
      detail += splanner::format_diagnostic(d) + "\n";
    }
    throw std::runtime_error("fixture failed to parse:\n" + detail);
  }
  auto validated = splanner::efsm::validate_document(*parsed.document);
  if (!validated.kb) {
    std::string detail;
    for (const auto& d : validated.diagnostics) {
      detail += splanner::format_diagnostic(d) + "\n";
    }
    throw std::runtime_error("fixture failed validation:\n" + detail);
  }
  return std::move(*validated.kb);
}

inline splanner::efsm::KnowledgeBase load_fixture_kb() {
  return kb_from_text(read_file(source_dir() + "/models/camera.efsm") +
                      read_file(source_dir() + "/models/contacts.efsm"));
}

inline const splanner::efsm::Efsm& camera(
    const splanner::efsm::KnowledgeBase& kb) {
  const auto* machine = kb.find("camera");
  if (!machine) throw std::runtime_error("camera fixture missing");
  return *machine;
}

}  // namespace testsupport
