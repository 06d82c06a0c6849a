#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace splanner::gateway {

struct GatewayConfig {
  std::string base_url;
  std::string model;
  std::string api_key;
  double timeout_seconds = 60.0;
  int max_retries = 2;
  int backoff_base_ms = 1000;  // doubles per retry: 1s, 2s, ...
  double temperature = 0.0;
};

// Fills base_url/api_key/model from SPLANNER_API_BASE / SPLANNER_API_KEY /
// SPLANNER_MODEL when set.
GatewayConfig config_from_env();

struct Message {
  std::string role;
  std::string content;

  bool operator==(const Message&) const = default;
};

enum class ErrorKind { Timeout, Transport, Status, EmptyReply, ReplayMiss };

const char* to_string(ErrorKind kind);
std::optional<ErrorKind> error_kind_from_string(const std::string& name);

struct GatewayError {
  ErrorKind kind = ErrorKind::Transport;
  int status_code = 0;  // set for ErrorKind::Status
  std::string detail;
};

using Reply = std::variant<std::string, GatewayError>;

inline bool ok(const Reply& r) { return std::holds_alternative<std::string>(r); }

// One request/reply attempt, as written to a JSONL transcript.
struct Exchange {
  std::string digest;  // request digest (model + temperature + messages)
  std::string model;
  double temperature = 0.0;
  std::vector<Message> request;
  bool success = false;
  std::string reply;
  std::string error_kind;  // empty when success
  std::string error_detail;
  int status_code = 0;
  int64_t latency_ms = 0;
};

// Digest of the request content: 16 lowercase hex chars (FNV-1a, 64-bit).
std::string request_digest(const std::string& model, double temperature,
                           const std::vector<Message>& messages);
uint64_t fnv1a64(const std::string& data);

std::string exchange_to_json(const Exchange& e);
std::optional<Exchange> exchange_from_json(const std::string& line);

// Append-only JSONL sink shared by the HTTP client and the recorder, so
// retried attempts land in the same file as top-level calls.
class TranscriptWriter {
 public:
  explicit TranscriptWriter(std::string path);
  void append(const Exchange& e);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::mutex mutex_;
};

class Gateway {
 public:
  virtual ~Gateway() = default;
  virtual Reply complete(const std::vector<Message>& messages) = 0;
};

// Talks the chat-completions HTTP shape: POST {base}/chat/completions with
// bearer auth; reads choices[0].message.content. Retries transport failures
// and 5xx/429 statuses only.
class HttpGateway : public Gateway {
 public:
  explicit HttpGateway(GatewayConfig config,
                       TranscriptWriter* transcript = nullptr);
  Reply complete(const std::vector<Message>& messages) override;

  // In-memory record of every attempt this session, including retries.
  const std::vector<Exchange>& exchanges() const { return exchanges_; }

 private:
  Reply attempt_once(const std::vector<Message>& messages, Exchange& record);

  GatewayConfig config_;
  TranscriptWriter* transcript_;
  std::vector<Exchange> exchanges_;
  std::mutex mutex_;
};

// Wraps any gateway and persists one Exchange per call.
class RecordingGateway : public Gateway {
 public:
  RecordingGateway(Gateway& inner, TranscriptWriter& transcript,
                   std::string model = "", double temperature = 0.0);
  Reply complete(const std::vector<Message>& messages) override;

 private:
  Gateway& inner_;
  TranscriptWriter& transcript_;
  std::string model_;
  double temperature_;
};

// Serves recorded replies by request digest, FIFO per digest; a request with
// no remaining recorded reply yields ErrorKind::ReplayMiss. Recorded failures
// replay as the same error kind.
class ReplayGateway : public Gateway {
 public:
  // Throws std::runtime_error if the transcript cannot be read.
  explicit ReplayGateway(const std::string& transcript_path,
                         std::string model = "", double temperature = 0.0);
  Reply complete(const std::vector<Message>& messages) override;

  size_t remaining() const;

 private:
  std::unordered_map<std::string, std::deque<Exchange>> by_digest_;
  std::string model_;
  double temperature_;
  mutable std::mutex mutex_;
};

}  // namespace splanner::gateway
