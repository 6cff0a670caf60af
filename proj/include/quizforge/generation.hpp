#pragma once

// Chat-completions client, batch runner with bounded concurrency, a shared
// token-bucket rate limiter, retries with exponential backoff and an
// append-only checkpoint.

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quizforge/errors.hpp"
#include "quizforge/model.hpp"
#include "quizforge/prompting.hpp"
#include "quizforge/quiz_parser.hpp"

namespace quizforge::generation {

struct ModelConfig {
  std::string endpoint_url;
  std::string model_name;
  double temperature = 0.7;
  int max_output_tokens = 2048;
  std::string api_key_env = "OPENAI_API_KEY";
  double timeout_seconds = 120.0;
  std::string system_prompt;

  void validate() const;
};

struct BatchPolicy {
  int max_concurrency = 4;
  int requests_per_minute = 60;
  int max_retries = 3;
  double backoff_base = 2.0;  // seconds; wait = base * 2^(attempt-1)

  void validate() const;
};

enum class RequestErrorKind { Timeout, HttpStatus, Auth, RateLimited, Connection, BadResponse };

std::string_view to_string(RequestErrorKind kind);

class RequestError : public Error {
 public:
  RequestError(RequestErrorKind kind, const std::string& message, int http_status = 0);

  RequestErrorKind kind() const noexcept { return kind_; }
  int http_status() const noexcept { return http_status_; }
  /// Rate limits, timeouts, connection failures and 5xx are retryable.
  bool retryable() const noexcept;

 private:
  RequestErrorKind kind_;
  int http_status_;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

/// One POST of a JSON body. Implementations throw RequestError for timeouts
/// and connection failures; HTTP error statuses are returned, not thrown.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual HttpResponse post_json(const std::string& url, const std::string& body, const Headers& headers,
                                 std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed transport for http:// and https:// endpoints.
std::unique_ptr<ChatTransport> make_http_transport();
/// `mock://...` endpoints get the in-process mock, everything else HTTP.
std::unique_ptr<ChatTransport> make_transport(const std::string& endpoint_url);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

/// URL actually posted to: endpoints not already ending in
/// `/chat/completions` get that path appended.
std::string completions_url(const std::string& endpoint_url);

std::string build_chat_request(const std::string& prompt, const ModelConfig& cfg);

/// `choices[0].message.content` of a chat-completions response.
std::string extract_message_content(std::string_view response_body);

/// Sends one prompt and returns the model's message content verbatim.
/// A missing API key is reported as RequestError(Auth) before any I/O.
std::string generate_one(const std::string& prompt, const ModelConfig& cfg, ChatTransport& transport,
                         const EnvLookup& env = process_env());

// ---------------------------------------------------------------------------
// Batch machinery

using Clock = std::chrono::steady_clock;
using Sleeper = std::function<void(std::chrono::duration<double>)>;

Sleeper real_sleeper();

/// Token bucket shared by all workers: refills at rpm/60 tokens per second
/// up to `burst` tokens.
class RateLimiter {
 public:
  RateLimiter(int requests_per_minute, int burst, Sleeper sleeper = real_sleeper());
  void acquire();

 private:
  double rate_per_second_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
  Sleeper sleep_;
  std::mutex mu_;
};

std::chrono::duration<double> backoff_delay(const BatchPolicy& policy, int failed_attempts);

/// Runs `job(i)` for i in [0, n) on at most `max_concurrency` threads.
void parallel_for(std::size_t n, int max_concurrency, const std::function<void(std::size_t)>& job);

struct GenerationOutcome {
  enum class Status { Ok, ParseFailed, RequestFailed };

  std::string doc_id;
  Status status = Status::Ok;
  std::optional<QuizSet> quiz_set;  // Ok
  std::string raw_text;             // last model reply
  std::string error;                // ParseFailed / RequestFailed
  std::optional<RequestErrorKind> error_kind;
  int http_status = 0;
  int attempts = 0;

  bool ok() const noexcept { return status == Status::Ok; }
  bool operator==(const GenerationOutcome&) const = default;
};

std::string_view to_string(GenerationOutcome::Status status);
Json to_json(const GenerationOutcome& outcome);
GenerationOutcome outcome_from_json(const Json& j);

struct BatchSummary {
  std::size_t ok = 0;
  std::size_t parse_failed = 0;
  std::size_t request_failed = 0;
  std::size_t resumed = 0;  // Ok outcomes taken from the checkpoint

  bool operator==(const BatchSummary&) const = default;
};

struct BatchResult {
  std::vector<GenerationOutcome> outcomes;  // input order
  BatchSummary summary;
};

struct BatchOptions {
  /// Append-only outcomes JSONL; documents already recorded Ok are skipped.
  std::optional<std::filesystem::path> checkpoint;
  std::function<std::string()> timestamp = [] { return UtcTime::now().to_string(); };
  Sleeper sleep = real_sleeper();
  EnvLookup env = process_env();
  std::function<void(const GenerationOutcome&)> on_outcome;
};

/// Outcome of one prompt under the retry policy: request failures are
/// retried with backoff while attempts remain; a parse failure gets exactly
/// one regeneration if the budget (max_retries + 1 requests) allows.
GenerationOutcome generate_with_policy(const std::string& doc_id, const std::string& prompt,
                                       const ExpectedShape& expected, const ModelConfig& cfg,
                                       const BatchPolicy& policy, ChatTransport& transport, RateLimiter& limiter,
                                       const BatchOptions& options);

BatchResult run_batch(std::span<const SourceDocument> docs, const prompting::TemplateSet& templates,
                      const prompting::RenderParams& params, const ModelConfig& cfg, const BatchPolicy& policy,
                      ChatTransport& transport, const BatchOptions& options = {});

/// Latest outcome per document recorded in a checkpoint file, in first-seen
/// order. Unreadable lines (e.g. a torn final line) are skipped.
std::vector<GenerationOutcome> read_checkpoint(const std::filesystem::path& path);

}  // namespace quizforge::generation
