#include "splanner/intent/intent.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace splanner::intent {

namespace {

std::string trim(const std::string& s) {
  size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_')
    return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

// Instruction word: raw text for slot captures, lowercased for keyword
// comparison. Surrounding punctuation is stripped so "photo." matches
// the keyword "photo".
struct Word {
  std::string raw;
  std::string folded;
};

std::vector<Word> tokenize_instruction(const std::string& text) {
  std::vector<Word> words;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    size_t begin = 0;
    size_t end = token.size();
    auto is_edge_punct = [](char c) {
      return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' ||
             c == ':' || c == '"' || c == '\'' || c == '(' || c == ')';
    };
    while (begin < end && is_edge_punct(token[begin])) ++begin;
    while (end > begin && is_edge_punct(token[end - 1])) --end;
    if (begin == end) continue;
    std::string raw = token.substr(begin, end - begin);
    words.push_back({raw, lower(raw)});
  }
  return words;
}

struct Match {
  size_t rule = 0;
  size_t length = 0;  // instruction tokens consumed
  std::vector<std::pair<std::string, std::string>> captures;  // slot -> text
};

// Tries one rule at word position `start`. Slots take a maximal run of
// non-keyword words, which is what lets a following literal terminate the
// capture (literals are keywords by construction).
std::optional<Match> match_rule(const std::vector<Word>& words, size_t start,
                                const LexiconRule& rule, size_t rule_index,
                                const std::unordered_set<std::string>& keywords) {
  Match m;
  m.rule = rule_index;
  size_t pos = start;
  for (const auto& token : rule.tokens) {
    if (!token.is_slot) {
      if (pos >= words.size() || words[pos].folded != token.text)
        return std::nullopt;
      ++pos;
      continue;
    }
    size_t capture_start = pos;
    std::string capture;
    while (pos < words.size() && !keywords.count(words[pos].folded)) {
      if (pos > capture_start) capture += ' ';
      capture += words[pos].raw;
      ++pos;
    }
    if (pos == capture_start) return std::nullopt;
    m.captures.emplace_back(token.text, capture);
  }
  m.length = pos - start;
  return m;
}

}  // namespace

std::optional<Instruction> make_instruction(const std::string& text) {
  if (trim(text).empty()) return std::nullopt;
  return Instruction{text};
}

const CatalogApp* FunctionCatalog::find(const std::string& app_id) const {
  for (const auto& app : apps) {
    if (app.app_id == app_id) return &app;
  }
  return nullptr;
}

const CatalogFunction* FunctionCatalog::find_function(
    const std::string& app_id, const std::string& name) const {
  const CatalogApp* app = find(app_id);
  if (!app) return nullptr;
  for (const auto& fn : app->functions) {
    if (fn.name == name) return &fn;
  }
  return nullptr;
}

FunctionCatalog build_catalog(const efsm::KnowledgeBase& kb) {
  FunctionCatalog catalog;
  for (const auto& machine : kb.machines()) {
    CatalogApp app;
    app.app_id = machine.app_id;
    for (const auto& fn : machine.functions) {
      app.functions.push_back({fn.name, fn.params, fn.description});
    }
    catalog.apps.push_back(std::move(app));
  }
  return catalog;
}

LexiconResult parse_lexicon(const std::string& text,
                            const std::string& filename) {
  LexiconResult result;
  Lexicon lexicon;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;

  auto fail = [&](DiagCode code, const std::string& message) {
    result.diagnostics.push_back(
        {code, Severity::Error, message, "",
         SourceSpan{filename, line_no, 1, 1}});
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;

    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(DiagCode::SYNTAX_ERROR,
           "lexicon line needs `pattern TAB app.function`");
      continue;
    }
    std::string pattern = trim(line.substr(0, tab));
    std::string target = trim(line.substr(tab + 1));
    size_t dot = target.find('.');
    if (pattern.empty() || dot == std::string::npos) {
      fail(DiagCode::SYNTAX_ERROR,
           "lexicon line needs `pattern TAB app.function`");
      continue;
    }

    LexiconRule rule;
    rule.pattern = pattern;
    rule.line = line_no;
    rule.app_id = target.substr(0, dot);
    rule.function = target.substr(dot + 1);
    if (!is_identifier(rule.app_id) || !is_identifier(rule.function)) {
      fail(DiagCode::SYNTAX_ERROR,
           "lexicon target must be `app.function`, got '" + target + "'");
      continue;
    }

    bool bad = false;
    std::unordered_set<std::string> seen_slots;
    std::istringstream pattern_in(pattern);
    std::string token;
    while (pattern_in >> token) {
      if (token.front() == '{' || token.back() == '}') {
        if (token.size() < 3 || token.front() != '{' || token.back() != '}' ||
            !is_identifier(token.substr(1, token.size() - 2))) {
          fail(DiagCode::BAD_PLACEHOLDER,
               "malformed capture slot '" + token + "'");
          bad = true;
          break;
        }
        std::string slot = token.substr(1, token.size() - 2);
        if (!seen_slots.insert(slot).second) {
          fail(DiagCode::DUPLICATE_NAME,
               "capture slot '" + slot + "' repeats in pattern");
          bad = true;
          break;
        }
        rule.tokens.push_back({true, slot});
      } else {
        rule.tokens.push_back({false, lower(token)});
      }
    }
    if (bad || rule.tokens.empty()) {
      if (!bad) fail(DiagCode::SYNTAX_ERROR, "empty lexicon pattern");
      continue;
    }
    lexicon.rules.push_back(std::move(rule));
  }

  if (!has_errors(result.diagnostics)) result.lexicon = std::move(lexicon);
  return result;
}

LexiconResult load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    LexiconResult result;
    result.diagnostics.push_back({DiagCode::SYNTAX_ERROR, Severity::Error,
                                  "cannot open lexicon file", path,
                                  SourceSpan{path, 1, 1, 1}});
    return result;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_lexicon(buffer.str(), path);
}

LexiconParseResult parse_intent_lexicon(const Instruction& instruction,
                                        const FunctionCatalog& catalog,
                                        const Lexicon& lexicon) {
  (void)catalog;  // resolution happens via validate_intent, centrally
  std::unordered_set<std::string> keywords;
  for (const auto& rule : lexicon.rules) {
    for (const auto& token : rule.tokens) {
      if (!token.is_slot) keywords.insert(token.text);
    }
  }

  const std::vector<Word> words = tokenize_instruction(instruction.text);
  std::vector<std::pair<const LexiconRule*, Match>> hits;

  size_t i = 0;
  while (i < words.size()) {
    std::vector<Match> here;
    for (size_t r = 0; r < lexicon.rules.size(); ++r) {
      auto m = match_rule(words, i, lexicon.rules[r], r, keywords);
      if (m) here.push_back(std::move(*m));
    }
    if (here.empty()) {
      ++i;
      continue;
    }
    size_t best = 0;
    for (size_t k = 1; k < here.size(); ++k) {
      if (here[k].length > here[best].length) best = k;
    }
    std::vector<std::string> tied;
    for (const auto& m : here) {
      if (m.length == here[best].length) {
        tied.push_back(lexicon.rules[m.rule].pattern);
      }
    }
    if (tied.size() > 1) {
      return AmbiguousMatch{i, std::move(tied)};
    }
    hits.emplace_back(&lexicon.rules[here[best].rule], std::move(here[best]));
    i += hits.back().second.length;
  }

  if (hits.empty()) return NoMatch{};

  ParsedIntent intent;
  for (const auto& [rule, match] : hits) {
    solver::TargetItem item;
    item.function = rule->function;
    for (const auto& [slot, value] : match.captures) item.args[slot] = value;
    if (intent.entries.empty() || intent.entries.back().app_id != rule->app_id) {
      intent.entries.push_back({rule->app_id, {}});
    }
    intent.entries.back().targets.items.push_back(std::move(item));
  }
  return intent;
}

std::vector<Diagnostic> validate_intent(const ParsedIntent& intent,
                                        const efsm::KnowledgeBase& kb) {
  std::vector<Diagnostic> diags;
  if (intent.entries.empty()) {
    diags.push_back({DiagCode::DOMAIN_MISMATCH, Severity::Error,
                     "parsed intent has no entries", ""});
    return diags;
  }
  for (const auto& entry : intent.entries) {
    const efsm::Efsm* machine = kb.find(entry.app_id);
    if (!machine) {
      diags.push_back({DiagCode::UNKNOWN_APP, Severity::Error,
                       "knowledge base has no app '" + entry.app_id + "'",
                       entry.app_id});
      continue;
    }
    auto target_diags = solver::validate_targets(*machine, entry.targets);
    diags.insert(diags.end(), target_diags.begin(), target_diags.end());
  }
  return diags;
}

namespace {

std::string catalog_listing(const FunctionCatalog& catalog) {
  std::ostringstream out;
  for (const auto& app : catalog.apps) {
    out << "app " << app.app_id << ":\n";
    for (const auto& fn : app.functions) {
      out << "  " << fn.name << "(";
      for (size_t i = 0; i < fn.params.size(); ++i) {
        if (i) out << ", ";
        out << fn.params[i];
      }
      out << ")";
      if (!fn.description.empty()) out << " -- " << fn.description;
      out << "\n";
    }
  }
  return out.str();
}

// Reply lines for one parsed APP/CALL block, or a schema error message.
struct ReplyParse {
  std::optional<ParsedIntent> intent;
  std::string error;
};

bool scan_args(const std::string& rest,
               std::map<std::string, std::string>& args, std::string& error) {
  size_t i = 0;
  const size_t n = rest.size();
  while (i < n) {
    while (i < n && rest[i] == ' ') ++i;
    if (i >= n) break;
    size_t eq = rest.find('=', i);
    if (eq == std::string::npos || eq == i) {
      error = "expected key=value, got '" + rest.substr(i) + "'";
      return false;
    }
    std::string key = rest.substr(i, eq - i);
    if (!is_identifier(key)) {
      error = "bad argument name '" + key + "'";
      return false;
    }
    i = eq + 1;
    std::string value;
    if (i < n && rest[i] == '"') {
      ++i;
      while (i < n && rest[i] != '"') value += rest[i++];
      if (i >= n) {
        error = "unterminated quoted value for '" + key + "'";
        return false;
      }
      ++i;
    } else {
      while (i < n && rest[i] != ' ') value += rest[i++];
    }
    if (args.count(key)) {
      error = "argument '" + key + "' given twice";
      return false;
    }
    args[key] = value;
  }
  return true;
}

ReplyParse parse_reply(const std::string& reply,
                       const FunctionCatalog& catalog) {
  ReplyParse out;
  ParsedIntent intent;
  std::istringstream in(reply);
  std::string line;
  const CatalogApp* current_app = nullptr;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = trim(line);
    if (stripped.empty()) continue;

    std::istringstream tokens(stripped);
    std::string head;
    tokens >> head;
    if (head == "APP") {
      std::string app_id, extra;
      tokens >> app_id;
      if (app_id.empty() || (tokens >> extra)) {
        out.error = "APP line must name exactly one app: '" + stripped + "'";
        return out;
      }
      current_app = catalog.find(app_id);
      if (!current_app) {
        out.error = "unknown app '" + app_id + "'";
        return out;
      }
      if (intent.entries.empty() || intent.entries.back().app_id != app_id) {
        intent.entries.push_back({app_id, {}});
      }
    } else if (head == "CALL") {
      if (!current_app) {
        out.error = "CALL before any APP line";
        return out;
      }
      std::string fn_name;
      tokens >> fn_name;
      if (fn_name.empty()) {
        out.error = "CALL line missing function name";
        return out;
      }
      const CatalogFunction* fn = nullptr;
      for (const auto& candidate : current_app->functions) {
        if (candidate.name == fn_name) fn = &candidate;
      }
      if (!fn) {
        out.error = "app '" + current_app->app_id + "' has no function '" +
                    fn_name + "'";
        return out;
      }
      std::string rest;
      std::getline(tokens, rest);
      solver::TargetItem item;
      item.function = fn_name;
      std::string arg_error;
      if (!scan_args(trim(rest), item.args, arg_error)) {
        out.error = arg_error;
        return out;
      }
      for (const auto& formal : fn->params) {
        if (!item.args.count(formal)) {
          out.error = "call to '" + fn_name + "' is missing argument '" +
                      formal + "'";
          return out;
        }
      }
      for (const auto& [key, _] : item.args) {
        if (std::find(fn->params.begin(), fn->params.end(), key) ==
            fn->params.end()) {
          out.error =
              "call to '" + fn_name + "' has unknown argument '" + key + "'";
          return out;
        }
      }
      intent.entries.back().targets.items.push_back(std::move(item));
    } else {
      out.error = "unexpected line: '" + stripped + "'";
      return out;
    }
  }

  if (intent.entries.empty()) {
    out.error = "reply contained no APP/CALL lines";
    return out;
  }
  for (const auto& entry : intent.entries) {
    if (entry.targets.items.empty()) {
      out.error = "APP " + entry.app_id + " has no CALL lines";
      return out;
    }
  }
  out.intent = std::move(intent);
  return out;
}

}  // namespace

std::vector<gateway::Message> parsing_messages(const Instruction& instruction,
                                               const FunctionCatalog& catalog) {
  std::string system =
      "You translate one phone-automation instruction into app function "
      "calls.\nKnown applications and functions:\n" +
      catalog_listing(catalog) +
      "Reply with one line per application in the order used: APP <app_id>\n"
      "After each APP line, one line per requested call in order: "
      "CALL <function> key=value ...\n"
      "Put double quotes around a value that contains spaces. "
      "Output nothing else.";
  return {{"system", system}, {"user", instruction.text}};
}

std::vector<gateway::Message> repair_messages(
    const std::vector<gateway::Message>& previous, const std::string& reply,
    const std::string& error) {
  std::vector<gateway::Message> messages = previous;
  messages.push_back({"assistant", reply});
  messages.push_back({"user", "Your reply was invalid: " + error +
                                  "\nReply again with only APP and CALL "
                                  "lines in the required format."});
  return messages;
}

LlmParseResult parse_intent_llm(const Instruction& instruction,
                                const FunctionCatalog& catalog,
                                gateway::Gateway& gw) {
  std::vector<gateway::Message> messages =
      parsing_messages(instruction, catalog);
  gateway::Reply first = gw.complete(messages);
  if (!gateway::ok(first)) return std::get<gateway::GatewayError>(first);

  const std::string first_reply = std::get<std::string>(first);
  ReplyParse parsed = parse_reply(first_reply, catalog);
  if (parsed.intent) return *parsed.intent;

  gateway::Reply second =
      gw.complete(repair_messages(messages, first_reply, parsed.error));
  if (!gateway::ok(second)) return std::get<gateway::GatewayError>(second);

  const std::string second_reply = std::get<std::string>(second);
  ReplyParse repaired = parse_reply(second_reply, catalog);
  if (repaired.intent) return *repaired.intent;

  return ParseFailure{first_reply, second_reply, repaired.error};
}

}  // namespace splanner::intent
