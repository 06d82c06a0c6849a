#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "splanner/efsm/validate.hpp"
#include "splanner/gateway/gateway.hpp"
#include "splanner/intent/intent.hpp"
#include "splanner/plan/plan.hpp"
#include "splanner/run/runner.hpp"
#include "splanner/sim/episode.hpp"
#include "splanner/solver/solve.hpp"
#include "splanner/text/parse.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitIo = 2;

using namespace splanner;

void print_diagnostics(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << format_diagnostic(d) << "\n";
}

int cmd_validate(const std::vector<std::string>& files) {
  bool any_diagnostic = false;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) {
      std::cerr << file << ": cannot open file\n";
      return kExitIo;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    text::ParseResult parsed = text::parse_model(buffer.str(), file);
    print_diagnostics(parsed.diagnostics);
    any_diagnostic |= !parsed.diagnostics.empty();
    if (!parsed.document) continue;
    efsm::KbValidationResult validated =
        efsm::validate_document(*parsed.document);
    print_diagnostics(validated.diagnostics);
    any_diagnostic |= !validated.diagnostics.empty();
  }
  return any_diagnostic ? kExitError : kExitOk;
}

// Parses "fn(a=1, b=2), fn2" into a target sequence. Values may be
// double-quoted to include commas or parentheses.
bool parse_target_list(const std::string& text,
                       solver::TargetSequence& targets, std::string& error) {
  size_t i = 0;
  const size_t n = text.size();
  auto skip_spaces = [&]() {
    while (i < n && (text[i] == ' ' || text[i] == '\t')) ++i;
  };

  while (true) {
    skip_spaces();
    if (i >= n) break;
    std::string name;
    while (i < n && (std::isalnum(static_cast<unsigned char>(text[i])) ||
                     text[i] == '_')) {
      name += text[i++];
    }
    if (name.empty()) {
      error = "expected a function name at position " + std::to_string(i + 1);
      return false;
    }
    solver::TargetItem item;
    item.function = name;
    skip_spaces();
    if (i < n && text[i] == '(') {
      ++i;
      while (true) {
        skip_spaces();
        if (i < n && text[i] == ')') {
          ++i;
          break;
        }
        std::string key;
        while (i < n && (std::isalnum(static_cast<unsigned char>(text[i])) ||
                         text[i] == '_')) {
          key += text[i++];
        }
        skip_spaces();
        if (key.empty() || i >= n || text[i] != '=') {
          error = "expected key=value inside " + name + "(...)";
          return false;
        }
        ++i;
        skip_spaces();
        std::string value;
        if (i < n && text[i] == '"') {
          ++i;
          while (i < n && text[i] != '"') value += text[i++];
          if (i >= n) {
            error = "unterminated quoted value for '" + key + "'";
            return false;
          }
          ++i;
        } else {
          while (i < n && text[i] != ',' && text[i] != ')') value += text[i++];
          while (!value.empty() && value.back() == ' ') value.pop_back();
        }
        item.args[key] = value;
        skip_spaces();
        if (i < n && text[i] == ',') ++i;
      }
    }
    targets.items.push_back(std::move(item));
    skip_spaces();
    if (i >= n) break;
    if (text[i] != ',') {
      error = "expected ',' between target calls";
      return false;
    }
    ++i;
  }
  if (targets.items.empty()) return true;
  return true;
}

int load_models_or_fail(const std::string& path,
                        std::optional<efsm::KnowledgeBase>& kb) {
  run::ModelsResult models = run::load_models(path);
  if (!models.ok()) {
    print_diagnostics(models.diagnostics);
    return models.io_error ? kExitIo : kExitError;
  }
  kb = std::move(models.kb);
  return kExitOk;
}

int cmd_solve(const std::string& models_path, const std::string& app_id,
              const std::string& targets_text) {
  std::optional<efsm::KnowledgeBase> kb;
  if (int status = load_models_or_fail(models_path, kb)) return status;

  const efsm::Efsm* machine = kb->find(app_id);
  if (!machine) {
    std::cerr << "error UNKNOWN_APP: knowledge base has no app '" << app_id
              << "'\n";
    return kExitError;
  }

  solver::TargetSequence targets;
  std::string error;
  if (!parse_target_list(targets_text, targets, error)) {
    std::cerr << "error: " << error << "\n";
    return kExitError;
  }
  std::vector<Diagnostic> diags = solver::validate_targets(*machine, targets);
  if (has_errors(diags)) {
    print_diagnostics(diags);
    return kExitError;
  }

  try {
    solver::SolveResult result = solver::solve(*machine, targets);
    if (std::holds_alternative<solver::Infeasible>(result)) {
      std::cout << "infeasible: no execution path invokes the targets in "
                   "order\n";
    } else {
      std::cout << solver::format_path(std::get<solver::ExecutionPath>(result));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}

struct GatewayFlags {
  std::string base;
  std::string model;
  std::string replay;
};

// flags > env > manifest/baseline.
gateway::GatewayConfig resolve_gateway(const GatewayFlags& flags,
                                       gateway::GatewayConfig base) {
  gateway::GatewayConfig env = gateway::config_from_env();
  if (!env.base_url.empty()) base.base_url = env.base_url;
  if (!env.api_key.empty()) base.api_key = env.api_key;
  if (!env.model.empty()) base.model = env.model;
  if (!flags.base.empty()) base.base_url = flags.base;
  if (!flags.model.empty()) base.model = flags.model;
  return base;
}

std::unique_ptr<gateway::Gateway> make_gateway(const GatewayFlags& flags,
                                               const gateway::GatewayConfig& cfg,
                                               std::string& error) {
  if (!flags.replay.empty()) {
    try {
      return std::make_unique<gateway::ReplayGateway>(flags.replay, cfg.model,
                                                      cfg.temperature);
    } catch (const std::exception& e) {
      error = e.what();
      return nullptr;
    }
  }
  if (cfg.base_url.empty()) {
    error = "no gateway configured (need --gateway-base, SPLANNER_API_BASE, "
            "or --replay)";
    return nullptr;
  }
  return std::make_unique<gateway::HttpGateway>(cfg);
}

int cmd_plan(const std::string& models_path, const std::string& lexicon_path,
             const std::string& parser, const std::string& instruction_text,
             bool polish, const GatewayFlags& gw_flags) {
  std::optional<efsm::KnowledgeBase> kb;
  if (int status = load_models_or_fail(models_path, kb)) return status;

  auto instruction = intent::make_instruction(instruction_text);
  if (!instruction) {
    std::cerr << "error: instruction is empty\n";
    return kExitError;
  }
  intent::FunctionCatalog catalog = intent::build_catalog(*kb);

  gateway::GatewayConfig gw_config = resolve_gateway(gw_flags, {});
  std::unique_ptr<gateway::Gateway> gw;

  intent::ParsedIntent parsed;
  if (parser == "lexicon") {
    if (lexicon_path.empty()) {
      std::cerr << "error: --parser lexicon needs --lexicon <file>\n";
      return kExitError;
    }
    intent::LexiconResult lexicon = intent::load_lexicon(lexicon_path);
    if (!lexicon.ok()) {
      print_diagnostics(lexicon.diagnostics);
      return kExitError;
    }
    intent::LexiconParseResult result =
        intent::parse_intent_lexicon(*instruction, catalog, *lexicon.lexicon);
    if (std::holds_alternative<intent::NoMatch>(result)) {
      std::cerr << "error: no lexicon pattern matches the instruction\n";
      return kExitError;
    }
    if (auto* ambiguous = std::get_if<intent::AmbiguousMatch>(&result)) {
      std::cerr << "error AMBIGUOUS_MATCH: patterns of equal length fire at "
                   "word "
                << (ambiguous->token_index + 1) << ":";
      for (const auto& pattern : ambiguous->patterns) {
        std::cerr << " '" << pattern << "'";
      }
      std::cerr << "\n";
      return kExitError;
    }
    parsed = std::get<intent::ParsedIntent>(std::move(result));
  } else if (parser == "llm") {
    std::string gw_error;
    gw = make_gateway(gw_flags, gw_config, gw_error);
    if (!gw) {
      std::cerr << "error: " << gw_error << "\n";
      return kExitError;
    }
    intent::LlmParseResult result =
        intent::parse_intent_llm(*instruction, catalog, *gw);
    if (auto* failure = std::get_if<intent::ParseFailure>(&result)) {
      std::cerr << "error: model reply failed validation twice: "
                << failure->reason << "\n";
      return kExitError;
    }
    if (auto* gw_err = std::get_if<gateway::GatewayError>(&result)) {
      std::cerr << "error: gateway " << gateway::to_string(gw_err->kind)
                << ": " << gw_err->detail << "\n";
      return kExitError;
    }
    parsed = std::get<intent::ParsedIntent>(std::move(result));
  } else {
    std::cerr << "error: --parser must be `lexicon` or `llm`\n";
    return kExitError;
  }

  std::vector<Diagnostic> intent_diags = intent::validate_intent(parsed, *kb);
  if (has_errors(intent_diags)) {
    print_diagnostics(intent_diags);
    return kExitError;
  }

  plan::Plan the_plan;
  try {
    solver::GlobalResult solved = solver::solve_all(*kb, parsed.entries);
    if (std::holds_alternative<solver::Infeasible>(solved)) {
      the_plan = plan::render_fallback();
    } else {
      the_plan = plan::render_template(std::get<solver::GlobalPath>(solved),
                                       *instruction);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }

  if (polish && !the_plan.fallback) {
    if (!gw) {
      std::string gw_error;
      gw = make_gateway(gw_flags, gw_config, gw_error);
      if (!gw) {
        std::cerr << "error: --polish needs a gateway: " << gw_error << "\n";
        return kExitError;
      }
    }
    the_plan = plan::polish_llm(the_plan, *instruction, *gw);
    for (const auto& note : the_plan.notes) std::cerr << note << "\n";
  }

  std::cout << plan::to_text(the_plan);
  return kExitOk;
}

int cmd_run(const std::string& manifest_path, const GatewayFlags& gw_flags,
            const std::string& models_flag, const std::string& lexicon_flag,
            const std::string& out_flag, int jobs_flag, int64_t seed_flag) {
  run::ManifestResult loaded = run::load_manifest(manifest_path);
  if (!loaded.ok()) {
    print_diagnostics(loaded.diagnostics);
    for (const auto& d : loaded.diagnostics) {
      if (d.message.find("cannot open") != std::string::npos) return kExitIo;
    }
    return kExitError;
  }
  run::RunManifest manifest = std::move(*loaded.manifest);

  manifest.gateway = resolve_gateway(gw_flags, manifest.gateway);
  if (!gw_flags.replay.empty()) manifest.replay_path = gw_flags.replay;
  if (!models_flag.empty()) manifest.models_path = models_flag;
  if (!lexicon_flag.empty()) manifest.lexicon_path = lexicon_flag;
  if (!out_flag.empty()) manifest.out_dir = out_flag;
  if (jobs_flag > 0) manifest.jobs = jobs_flag;
  if (seed_flag >= 0) manifest.seed = static_cast<uint64_t>(seed_flag);

  try {
    run::RunReport report = run::execute_run(manifest);
    std::cout << report.to_text();
  } catch (const std::exception& e) {
    std::string what = e.what();
    std::cerr << "error: " << what << "\n";
    return what.rfind("io: ", 0) == 0 ? kExitIo : kExitError;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EFSM-based planning toolkit for app automation"};
  app.require_subcommand(1);

  std::vector<std::string> validate_files;
  CLI::App* validate = app.add_subcommand("validate", "Check model files");
  validate->add_option("files", validate_files, "model files (.efsm)")
      ->required();

  std::string models_path, app_id, targets_text;
  CLI::App* solve = app.add_subcommand("solve", "Find a minimal path");
  solve->add_option("--models", models_path, ".efsm file or directory")
      ->required();
  solve->add_option("--app", app_id, "app id")->required();
  solve->add_option("--targets", targets_text,
                    "target calls, e.g. \"record_video(duration=5s)\"")
      ->required();

  std::string plan_models, plan_lexicon, plan_parser = "lexicon";
  std::string plan_instruction;
  bool plan_polish = false;
  GatewayFlags plan_gw;
  CLI::App* plan_cmd = app.add_subcommand("plan", "Produce an execution plan");
  plan_cmd->add_option("--models", plan_models, ".efsm file or directory")
      ->required();
  plan_cmd->add_option("--instruction", plan_instruction, "what to do")
      ->required();
  plan_cmd->add_option("--lexicon", plan_lexicon, "lexicon file (.tsv)");
  plan_cmd->add_option("--parser", plan_parser, "lexicon (default) or llm");
  plan_cmd->add_flag("--polish", plan_polish, "refine the plan via the model");
  plan_cmd->add_option("--gateway-base", plan_gw.base, "chat-completions base URL");
  plan_cmd->add_option("--gateway-model", plan_gw.model, "model identifier");
  plan_cmd->add_option("--replay", plan_gw.replay, "replay transcript (.jsonl)");

  std::string run_manifest, run_models, run_lexicon, run_out;
  GatewayFlags run_gw;
  int run_jobs = 0;
  int64_t run_seed = -1;
  CLI::App* run_cmd = app.add_subcommand("run", "Run a task batch");
  run_cmd->add_option("--manifest", run_manifest, "run manifest (.json)")
      ->required();
  run_cmd->add_option("--models", run_models, "override manifest models path");
  run_cmd->add_option("--lexicon", run_lexicon, "override manifest lexicon");
  run_cmd->add_option("--out", run_out, "override output directory");
  run_cmd->add_option("--jobs", run_jobs, "parallel episodes");
  run_cmd->add_option("--seed", run_seed, "run seed");
  run_cmd->add_option("--gateway-base", run_gw.base, "chat-completions base URL");
  run_cmd->add_option("--gateway-model", run_gw.model, "model identifier");
  run_cmd->add_option("--replay", run_gw.replay, "replay transcript (.jsonl)");

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) return cmd_validate(validate_files);
  if (solve->parsed()) return cmd_solve(models_path, app_id, targets_text);
  if (plan_cmd->parsed()) {
    return cmd_plan(plan_models, plan_lexicon, plan_parser, plan_instruction,
                    plan_polish, plan_gw);
  }
  if (run_cmd->parsed()) {
    return cmd_run(run_manifest, run_gw, run_models, run_lexicon, run_out,
                   run_jobs, run_seed);
  }
  return kExitError;
}
