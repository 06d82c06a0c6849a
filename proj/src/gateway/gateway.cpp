#include "splanner/gateway/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "json.hpp"

using nlohmann::json;

namespace splanner::gateway {

namespace {

// Splits "http://host:port/prefix" into client origin and path prefix.
struct BaseUrl {
  std::string origin;
  std::string prefix;
};

BaseUrl split_base_url(const std::string& base) {
  std::string trimmed = base;
  while (!trimmed.empty() && trimmed.back() == '/') trimmed.pop_back();
  size_t scheme = trimmed.find("://");
  size_t path_start =
      trimmed.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {trimmed, ""};
  return {trimmed.substr(0, path_start), trimmed.substr(path_start)};
}

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

std::string getenv_or(const char* name, const std::string& fallback) {
  const char* value = std::getenv(name);
  return value ? std::string(value) : fallback;
}

}  // namespace

GatewayConfig config_from_env() {
  GatewayConfig config;
  config.base_url = getenv_or("SPLANNER_API_BASE", "");
  config.api_key = getenv_or("SPLANNER_API_KEY", "");
  config.model = getenv_or("SPLANNER_MODEL", "");
  return config;
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Timeout: return "timeout";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::Status: return "status";
    case ErrorKind::EmptyReply: return "empty_reply";
    case ErrorKind::ReplayMiss: return "replay_miss";
  }
  return "transport";
}

std::optional<ErrorKind> error_kind_from_string(const std::string& name) {
  if (name == "timeout") return ErrorKind::Timeout;
  if (name == "transport") return ErrorKind::Transport;
  if (name == "status") return ErrorKind::Status;
  if (name == "empty_reply") return ErrorKind::EmptyReply;
  if (name == "replay_miss") return ErrorKind::ReplayMiss;
  return std::nullopt;
}

uint64_t fnv1a64(const std::string& data) {
  uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string request_digest(const std::string& model, double temperature,
                           const std::vector<Message>& messages) {
  json body;
  body["model"] = model;
  body["temperature"] = temperature;
  body["messages"] = json::array();
  for (const auto& m : messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  uint64_t hash = fnv1a64(body.dump());
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

std::string exchange_to_json(const Exchange& e) {
  json record;
  record["digest"] = e.digest;
  record["model"] = e.model;
  record["temperature"] = e.temperature;
  record["request"] = json::array();
  for (const auto& m : e.request) {
    record["request"].push_back({{"role", m.role}, {"content", m.content}});
  }
  record["success"] = e.success;
  record["reply"] = e.reply;
  record["error_kind"] = e.error_kind;
  record["error_detail"] = e.error_detail;
  record["status_code"] = e.status_code;
  record["latency_ms"] = e.latency_ms;
  return record.dump();
}

std::optional<Exchange> exchange_from_json(const std::string& line) {
  json record = json::parse(line, nullptr, false);
  if (record.is_discarded() || !record.is_object()) return std::nullopt;
  Exchange e;
  try {
    e.digest = record.value("digest", "");
    e.model = record.value("model", "");
    e.temperature = record.value("temperature", 0.0);
    if (record.contains("request") && record["request"].is_array()) {
      for (const auto& m : record["request"]) {
        e.request.push_back({m.value("role", ""), m.value("content", "")});
      }
    }
    e.success = record.value("success", false);
    e.reply = record.value("reply", "");
    e.error_kind = record.value("error_kind", "");
    e.error_detail = record.value("error_detail", "");
    e.status_code = record.value("status_code", 0);
    e.latency_ms = record.value("latency_ms", int64_t{0});
  } catch (const json::exception&) {
    return std::nullopt;  // a field with the wrong type
  }
  if (e.digest.empty()) return std::nullopt;
  return e;
}

TranscriptWriter::TranscriptWriter(std::string path) : path_(std::move(path)) {}

void TranscriptWriter::append(const Exchange& e) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot open transcript: " + path_);
  out << exchange_to_json(e) << "\n";
}

HttpGateway::HttpGateway(GatewayConfig config, TranscriptWriter* transcript)
    : config_(std::move(config)), transcript_(transcript) {}

Reply HttpGateway::attempt_once(const std::vector<Message>& messages,
                                Exchange& record) {
  BaseUrl base = split_base_url(config_.base_url);
  httplib::Client client(base.origin);
  client.set_connection_timeout(std::chrono::milliseconds(
      static_cast<int64_t>(config_.timeout_seconds * 1000)));
  client.set_read_timeout(std::chrono::milliseconds(
      static_cast<int64_t>(config_.timeout_seconds * 1000)));
  if (!config_.api_key.empty()) client.set_bearer_token_auth(config_.api_key);

  json body;
  body["model"] = config_.model;
  body["messages"] = json::array();
  for (const auto& m : messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  body["temperature"] = config_.temperature;

  auto started = std::chrono::steady_clock::now();
  httplib::Result result = client.Post(base.prefix + "/chat/completions",
                                       body.dump(), "application/json");
  record.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - started)
                          .count();

  if (!result) {
    GatewayError error;
    switch (result.error()) {
      case httplib::Error::ConnectionTimeout:
      case httplib::Error::Read:
      case httplib::Error::Write:
        error.kind = ErrorKind::Timeout;
        break;
      default:
        error.kind = ErrorKind::Transport;
        break;
    }
    error.detail = httplib::to_string(result.error());
    return error;
  }

  record.status_code = result->status;
  if (result->status != 200) {
    return GatewayError{ErrorKind::Status, result->status,
                        "HTTP " + std::to_string(result->status)};
  }

  json parsed = json::parse(result->body, nullptr, false);
  if (parsed.is_discarded()) {
    return GatewayError{ErrorKind::Transport, 0, "malformed JSON reply"};
  }
  std::string content;
  if (parsed.contains("choices") && parsed["choices"].is_array() &&
      !parsed["choices"].empty()) {
    content = parsed["choices"][0].value("message", json::object())
                  .value("content", "");
  }
  if (content.empty()) {
    return GatewayError{ErrorKind::EmptyReply, 0, "no reply content"};
  }
  return content;
}

Reply HttpGateway::complete(const std::vector<Message>& messages) {
  const std::string digest =
      request_digest(config_.model, config_.temperature, messages);
  Reply last = GatewayError{ErrorKind::Transport, 0, "no attempt made"};

  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(
          static_cast<int64_t>(config_.backoff_base_ms) << (attempt - 1)));
    }

    Exchange record;
    record.digest = digest;
    record.model = config_.model;
    record.temperature = config_.temperature;
    record.request = messages;
    last = attempt_once(messages, record);

    if (ok(last)) {
      record.success = true;
      record.reply = std::get<std::string>(last);
    } else {
      const auto& error = std::get<GatewayError>(last);
      record.error_kind = to_string(error.kind);
      record.error_detail = error.detail;
    }
    {
      std::lock_guard<std::mutex> lock(mutex_);
      exchanges_.push_back(record);
    }
    if (transcript_) transcript_->append(record);

    if (ok(last)) return last;
    const auto& error = std::get<GatewayError>(last);
    const bool retryable =
        error.kind == ErrorKind::Timeout || error.kind == ErrorKind::Transport ||
        (error.kind == ErrorKind::Status && retryable_status(error.status_code));
    if (!retryable) return last;
  }
  return last;
}

RecordingGateway::RecordingGateway(Gateway& inner, TranscriptWriter& transcript,
                                   std::string model, double temperature)
    : inner_(inner),
      transcript_(transcript),
      model_(std::move(model)),
      temperature_(temperature) {}

Reply RecordingGateway::complete(const std::vector<Message>& messages) {
  Reply reply = inner_.complete(messages);
  Exchange record;
  record.digest = request_digest(model_, temperature_, messages);
  record.model = model_;
  record.temperature = temperature_;
  record.request = messages;
  if (ok(reply)) {
    record.success = true;
    record.reply = std::get<std::string>(reply);
  } else {
    const auto& error = std::get<GatewayError>(reply);
    record.error_kind = to_string(error.kind);
    record.error_detail = error.detail;
    record.status_code = error.status_code;
  }
  transcript_.append(record);
  return reply;
}

ReplayGateway::ReplayGateway(const std::string& transcript_path,
                             std::string model, double temperature)
    : model_(std::move(model)), temperature_(temperature) {
  std::ifstream in(transcript_path);
  if (!in) {
    throw std::runtime_error("cannot open transcript: " + transcript_path);
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto exchange = exchange_from_json(line);
    if (!exchange) {
      throw std::runtime_error("malformed transcript line in " +
                               transcript_path);
    }
    by_digest_[exchange->digest].push_back(std::move(*exchange));
  }
}

Reply ReplayGateway::complete(const std::vector<Message>& messages) {
  const std::string digest = request_digest(model_, temperature_, messages);
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = by_digest_.find(digest);
  if (it == by_digest_.end() || it->second.empty()) {
    return GatewayError{ErrorKind::ReplayMiss, 0,
                        "REPLAY_MISS: no recorded reply for digest " + digest};
  }
  Exchange exchange = std::move(it->second.front());
  it->second.pop_front();
  if (exchange.success) return exchange.reply;
  GatewayError error;
  error.kind = error_kind_from_string(exchange.error_kind)
                   .value_or(ErrorKind::Transport);
  error.status_code = exchange.status_code;
  error.detail = exchange.error_detail;
  return error;
}

size_t ReplayGateway::remaining() const {
  std::lock_guard<std::mutex> lock(mutex_);
  size_t count = 0;
  for (const auto& [_, queue] : by_digest_) count += queue.size();
  return count;
}

}  // namespace splanner::gateway
