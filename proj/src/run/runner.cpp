#include "splanner/run/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "splanner/efsm/validate.hpp"
#include "splanner/intent/intent.hpp"
#include "splanner/plan/plan.hpp"
#include "splanner/solver/solve.hpp"
#include "splanner/text/parse.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace splanner::run {

namespace {

Diagnostic manifest_error(const std::string& message,
                          const std::string& filename) {
  return {DiagCode::SYNTAX_ERROR, Severity::Error, message, "",
          SourceSpan{filename, 1, 1, 1}};
}

}  // namespace

ManifestResult parse_manifest(const std::string& text,
                              const std::string& filename) {
  ManifestResult result;
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    result.diagnostics.push_back(
        manifest_error("manifest is not a JSON object", filename));
    return result;
  }

  RunManifest manifest;
  manifest.models_path = doc.value("models", "");
  manifest.lexicon_path = doc.value("lexicon", "");
  manifest.executor = doc.value("executor", "oracle");
  manifest.out_dir = doc.value("out", "out");
  manifest.replay_path = doc.value("replay", "");
  manifest.seed = doc.value("seed", uint64_t{0});
  manifest.step_limit = doc.value("step_limit", 30);
  manifest.jobs = doc.value("jobs", 1);
  if (doc.contains("gateway") && doc["gateway"].is_object()) {
    const json& gw = doc["gateway"];
    manifest.gateway.base_url = gw.value("base_url", "");
    manifest.gateway.model = gw.value("model", "");
    manifest.gateway.api_key = gw.value("api_key", "");
    manifest.gateway.timeout_seconds = gw.value("timeout_seconds", 60.0);
    manifest.gateway.max_retries = gw.value("max_retries", 2);
    manifest.gateway.backoff_base_ms = gw.value("backoff_base_ms", 1000);
    manifest.gateway.temperature = gw.value("temperature", 0.0);
  }

  auto fail = [&](const std::string& message) {
    result.diagnostics.push_back(manifest_error(message, filename));
  };

  if (manifest.models_path.empty()) fail("manifest needs a `models` path");
  if (manifest.lexicon_path.empty()) fail("manifest needs a `lexicon` path");
  if (manifest.executor != "oracle" && manifest.executor != "vlm") {
    fail("executor must be `oracle` or `vlm`, got '" + manifest.executor + "'");
  }
  if (manifest.executor == "vlm" && manifest.replay_path.empty() &&
      manifest.gateway.base_url.empty()) {
    fail("executor `vlm` needs a gateway base_url or a replay transcript");
  }
  if (manifest.step_limit <= 0) fail("step_limit must be positive");
  if (manifest.jobs <= 0) fail("jobs must be positive");

  if (!doc.contains("tasks") || !doc["tasks"].is_array()) {
    fail("manifest needs a `tasks` array");
  } else {
    for (const auto& entry : doc["tasks"]) {
      TaskSpec task;
      task.id = entry.value("id", "");
      task.instruction = entry.value("instruction", "");
      if (task.id.empty()) fail("every task needs an `id`");
      if (task.instruction.empty()) {
        fail("task '" + task.id + "' needs an `instruction`");
      }
      if (entry.contains("goal") && entry["goal"].is_array()) {
        for (const auto& g : entry["goal"]) {
          sim::GoalItem item;
          item.app_id = g.value("app", "");
          item.function = g.value("function", "");
          if (g.contains("args") && g["args"].is_object()) {
            for (const auto& [key, value] : g["args"].items()) {
              item.args[key] = value.is_string()
                                   ? value.get<std::string>()
                                   : value.dump();
            }
          }
          if (item.app_id.empty() || item.function.empty()) {
            fail("task '" + task.id + "': goal items need `app` and `function`");
          }
          task.goal.items.push_back(std::move(item));
        }
      }
      manifest.tasks.push_back(std::move(task));
    }
    for (size_t i = 0; i < manifest.tasks.size(); ++i) {
      for (size_t j = i + 1; j < manifest.tasks.size(); ++j) {
        if (manifest.tasks[i].id == manifest.tasks[j].id) {
          result.diagnostics.push_back(
              {DiagCode::DUPLICATE_NAME, Severity::Error,
               "task id '" + manifest.tasks[i].id + "' appears twice",
               manifest.tasks[i].id, SourceSpan{filename, 1, 1, 1}});
        }
      }
    }
  }

  if (!has_errors(result.diagnostics)) result.manifest = std::move(manifest);
  return result;
}

ManifestResult load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ManifestResult result;
    result.diagnostics.push_back(
        manifest_error("cannot open manifest file", path));
    return result;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path);
}

ModelsResult load_models(const std::string& path) {
  ModelsResult result;
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    for (const auto& entry : fs::directory_iterator(path, ec)) {
      if (entry.path().extension() == ".efsm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      result.diagnostics.push_back({DiagCode::SYNTAX_ERROR, Severity::Error,
                                    "no .efsm files in directory", path,
                                    SourceSpan{path, 1, 1, 1}});
      return result;
    }
  } else {
    files.push_back(path);
  }

  efsm::ModelDocument merged;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) {
      result.io_error = true;
      result.diagnostics.push_back({DiagCode::SYNTAX_ERROR, Severity::Error,
                                    "cannot open model file", file.string(),
                                    SourceSpan{file.string(), 1, 1, 1}});
      return result;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    text::ParseResult parsed = text::parse_model(buffer.str(), file.string());
    result.diagnostics.insert(result.diagnostics.end(),
                              parsed.diagnostics.begin(),
                              parsed.diagnostics.end());
    if (parsed.document) {
      for (auto& app : parsed.document->apps) {
        merged.apps.push_back(std::move(app));
      }
    }
  }
  if (has_errors(result.diagnostics)) return result;

  efsm::KbValidationResult validated = efsm::validate_document(merged);
  result.diagnostics.insert(result.diagnostics.end(),
                            validated.diagnostics.begin(),
                            validated.diagnostics.end());
  if (validated.kb) result.kb = std::move(validated.kb);
  return result;
}

std::string RunReport::to_text() const {
  std::string out;
  for (const auto& task : tasks) {
    out += "task " + task.id + " outcome=" + task.outcome +
           " steps=" + std::to_string(task.steps) +
           " success=" + (task.success ? "1" : "0") + "\n";
  }
  char rate[32];
  double percent = tasks.empty()
                       ? 0.0
                       : 100.0 * static_cast<double>(successes) /
                             static_cast<double>(tasks.size());
  std::snprintf(rate, sizeof(rate), "%.1f", percent);
  out += "aggregate tasks=" + std::to_string(tasks.size()) +
         " successes=" + std::to_string(successes) + " success_rate=" + rate +
         "\n";
  return out;
}

namespace {

std::string diagnostics_text(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += "; ";
    out += format_diagnostic(d);
  }
  return out;
}

TaskResult failed_task(const std::string& id, const std::string& outcome,
                       const std::string& reason) {
  TaskResult result;
  result.id = id;
  result.outcome = outcome;
  json record;
  record["event"] = "outcome";
  record["outcome"] = outcome;
  record["steps"] = 0;
  record["reason"] = reason;
  result.trace.push_back(record.dump());
  return result;
}

TaskResult run_task(const TaskSpec& task, const efsm::KnowledgeBase& kb,
                    const intent::FunctionCatalog& catalog,
                    const intent::Lexicon& lexicon, sim::Executor& executor,
                    int step_limit) {
  auto instruction = intent::make_instruction(task.instruction);
  if (!instruction) {
    return failed_task(task.id, "parse_failure", "empty instruction");
  }

  intent::LexiconParseResult parsed =
      intent::parse_intent_lexicon(*instruction, catalog, lexicon);
  if (std::holds_alternative<intent::NoMatch>(parsed)) {
    return failed_task(task.id, "parse_failure", "no lexicon pattern matched");
  }
  if (std::holds_alternative<intent::AmbiguousMatch>(parsed)) {
    return failed_task(task.id, "parse_failure", "AMBIGUOUS_MATCH");
  }
  const intent::ParsedIntent& parsed_intent =
      std::get<intent::ParsedIntent>(parsed);

  std::vector<Diagnostic> intent_diags =
      intent::validate_intent(parsed_intent, kb);
  if (has_errors(intent_diags)) {
    return failed_task(task.id, "parse_failure",
                       diagnostics_text(intent_diags));
  }

  plan::Plan the_plan;
  try {
    solver::GlobalResult solved =
        solver::solve_all(kb, parsed_intent.entries);
    if (std::holds_alternative<solver::Infeasible>(solved)) {
      the_plan = plan::render_fallback();
    } else {
      the_plan = plan::render_template(std::get<solver::GlobalPath>(solved),
                                       *instruction);
    }
  } catch (const std::exception& e) {
    return failed_task(task.id, "solver_error", e.what());
  }

  sim::DeviceEnvironment env(kb);
  sim::Episode episode =
      sim::run_episode(env, executor, *instruction, the_plan, step_limit);

  TaskResult result;
  result.id = task.id;
  result.outcome = sim::to_string(episode.outcome);
  result.steps = episode.steps_taken;
  result.success = sim::check_goal(episode, task.goal);
  result.trace = sim::trace_lines(episode);
  return result;
}

}  // namespace

RunReport execute_run(const RunManifest& manifest) {
  ModelsResult models = load_models(manifest.models_path);
  if (!models.kb) {
    throw std::runtime_error(models.io_error
                                 ? "io: " + diagnostics_text(models.diagnostics)
                                 : "invalid models: " +
                                       diagnostics_text(models.diagnostics));
  }
  intent::LexiconResult lexicon = intent::load_lexicon(manifest.lexicon_path);
  if (!lexicon.lexicon) {
    throw std::runtime_error("invalid lexicon: " +
                             diagnostics_text(lexicon.diagnostics));
  }

  const efsm::KnowledgeBase& kb = *models.kb;
  intent::FunctionCatalog catalog = intent::build_catalog(kb);

  std::unique_ptr<gateway::Gateway> gw;
  std::unique_ptr<sim::Executor> executor;
  if (manifest.executor == "vlm") {
    if (!manifest.replay_path.empty()) {
      gw = std::make_unique<gateway::ReplayGateway>(
          manifest.replay_path, manifest.gateway.model,
          manifest.gateway.temperature);
    } else {
      gw = std::make_unique<gateway::HttpGateway>(manifest.gateway);
    }
    executor = std::make_unique<sim::VlmExecutor>(*gw);
  } else {
    executor = std::make_unique<sim::OracleExecutor>();
  }

  std::vector<TaskResult> results(manifest.tasks.size());
  const int jobs = std::max(
      1, std::min(manifest.jobs, static_cast<int>(manifest.tasks.size())));
  if (jobs <= 1) {
    for (size_t i = 0; i < manifest.tasks.size(); ++i) {
      results[i] = run_task(manifest.tasks[i], kb, catalog, *lexicon.lexicon,
                            *executor, manifest.step_limit);
    }
  } else {
    std::atomic<size_t> cursor{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&]() {
        while (true) {
          size_t i = cursor.fetch_add(1);
          if (i >= manifest.tasks.size()) return;
          results[i] = run_task(manifest.tasks[i], kb, catalog,
                                *lexicon.lexicon, *executor,
                                manifest.step_limit);
        }
      });
    }
    for (auto& worker : workers) worker.join();
  }

  RunReport report;
  report.tasks = std::move(results);
  std::sort(report.tasks.begin(), report.tasks.end(),
            [](const TaskResult& a, const TaskResult& b) { return a.id < b.id; });
  for (const auto& task : report.tasks) {
    if (task.success) ++report.successes;
  }

  fs::create_directories(manifest.out_dir);
  for (const auto& task : report.tasks) {
    std::ofstream trace(fs::path(manifest.out_dir) /
                        ("trace_" + task.id + ".jsonl"));
    for (const auto& line : task.trace) trace << line << "\n";
  }
  std::ofstream report_file(fs::path(manifest.out_dir) / "report.txt");
  report_file << report.to_text();
  return report;
}

}  // namespace splanner::run
