#include "quizforge/generation.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <thread>

#include "quizforge/io.hpp"
#include "quizforge/text.hpp"

namespace quizforge::generation {

void ModelConfig::validate() const {
  std::vector<Violation> v;
  if (text::is_blank(endpoint_url)) v.push_back({"endpoint_url", "must be non-empty"});
  if (text::is_blank(model_name)) v.push_back({"model_name", "must be non-empty"});
  if (!(temperature >= 0.0)) v.push_back({"temperature", "must be >= 0"});
  if (max_output_tokens <= 0) v.push_back({"max_output_tokens", "must be positive"});
  if (!(timeout_seconds > 0.0)) v.push_back({"timeout", "must be positive"});
  if (!v.empty()) throw ValidationError(std::move(v));
}

void BatchPolicy::validate() const {
  std::vector<Violation> v;
  if (max_concurrency <= 0) v.push_back({"max_concurrency", "must be positive"});
  if (requests_per_minute <= 0) v.push_back({"requests_per_minute", "must be positive"});
  if (max_retries < 0) v.push_back({"max_retries", "must be non-negative"});
  if (!(backoff_base >= 0.0)) v.push_back({"backoff_base", "must be non-negative"});
  if (!v.empty()) throw ValidationError(std::move(v));
}

std::string_view to_string(RequestErrorKind kind) {
  switch (kind) {
    case RequestErrorKind::Timeout: return "timeout";
    case RequestErrorKind::HttpStatus: return "http_status";
    case RequestErrorKind::Auth: return "auth";
    case RequestErrorKind::RateLimited: return "rate_limited";
    case RequestErrorKind::Connection: return "connection";
    case RequestErrorKind::BadResponse: return "bad_response";
  }
  return "unknown";
}

namespace {

std::optional<RequestErrorKind> parse_error_kind(std::string_view s) {
  for (auto k : {RequestErrorKind::Timeout, RequestErrorKind::HttpStatus, RequestErrorKind::Auth,
                 RequestErrorKind::RateLimited, RequestErrorKind::Connection, RequestErrorKind::BadResponse}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

}  // namespace

RequestError::RequestError(RequestErrorKind kind, const std::string& message, int http_status)
    : Error(Category::Io, fmt::format("{}: {}", to_string(kind), message)), kind_(kind), http_status_(http_status) {}

bool RequestError::retryable() const noexcept {
  switch (kind_) {
    case RequestErrorKind::Timeout:
    case RequestErrorKind::RateLimited:
    case RequestErrorKind::Connection:
      return true;
    case RequestErrorKind::HttpStatus:
      return http_status_ >= 500 || http_status_ == 408;
    case RequestErrorKind::Auth:
    case RequestErrorKind::BadResponse:
      return false;
  }
  return false;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

std::string completions_url(const std::string& endpoint_url) {
  constexpr std::string_view suffix = "/chat/completions";
  std::string url = endpoint_url;
  if (url.size() >= suffix.size() && url.compare(url.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return url;
  }
  while (!url.empty() && url.back() == '/') url.pop_back();
  return url + std::string(suffix);
}

std::string build_chat_request(const std::string& prompt, const ModelConfig& cfg) {
  Json messages = Json::array();
  if (!cfg.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", cfg.system_prompt}});
  messages.push_back({{"role", "user"}, {"content", prompt}});
  Json body;
  body["model"] = cfg.model_name;
  body["messages"] = std::move(messages);
  body["temperature"] = cfg.temperature;
  body["max_tokens"] = cfg.max_output_tokens;
  body["n"] = 1;
  return body.dump();
}

std::string extract_message_content(std::string_view response_body) {
  Json j;
  try {
    j = Json::parse(response_body.begin(), response_body.end());
  } catch (const Json::parse_error&) {
    throw RequestError(RequestErrorKind::BadResponse, "response is not JSON");
  }
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw RequestError(RequestErrorKind::BadResponse, "message content is not a string");
    return content.get<std::string>();
  } catch (const Json::exception&) {
    throw RequestError(RequestErrorKind::BadResponse, "response has no choices[0].message.content");
  }
}

std::string generate_one(const std::string& prompt, const ModelConfig& cfg, ChatTransport& transport,
                         const EnvLookup& env) {
  Headers headers;
  const bool mock = cfg.endpoint_url.rfind("mock://", 0) == 0;
  if (!mock && !cfg.api_key_env.empty()) {
    const auto key = env(cfg.api_key_env);
    if (!key || key->empty()) {
      throw RequestError(RequestErrorKind::Auth, fmt::format("environment variable {} is not set", cfg.api_key_env));
    }
    headers.emplace_back("Authorization", "Bearer " + *key);
  }
  const auto timeout = std::chrono::milliseconds(static_cast<std::int64_t>(cfg.timeout_seconds * 1000.0));
  const HttpResponse resp =
      transport.post_json(completions_url(cfg.endpoint_url), build_chat_request(prompt, cfg), headers, timeout);
  if (resp.status >= 200 && resp.status < 300) return extract_message_content(resp.body);
  const std::string snippet = resp.body.substr(0, 200);
  if (resp.status == 401 || resp.status == 403) {
    throw RequestError(RequestErrorKind::Auth, fmt::format("HTTP {}: {}", resp.status, snippet), resp.status);
  }
  if (resp.status == 429) {
    throw RequestError(RequestErrorKind::RateLimited, fmt::format("HTTP 429: {}", snippet), resp.status);
  }
  throw RequestError(RequestErrorKind::HttpStatus, fmt::format("HTTP {}: {}", resp.status, snippet), resp.status);
}

// ---------------------------------------------------------------------------
// Batch machinery

Sleeper real_sleeper() {
  return [](std::chrono::duration<double> d) {
    if (d.count() > 0) std::this_thread::sleep_for(d);
  };
}

RateLimiter::RateLimiter(int requests_per_minute, int burst, Sleeper sleeper)
    : rate_per_second_(std::max(1, requests_per_minute) / 60.0),
      capacity_(std::max(1, burst)),
      tokens_(capacity_),
      last_(Clock::now()),
      sleep_(std::move(sleeper)) {}

void RateLimiter::acquire() {
  // Waiters queue on the mutex, so the wait happens while holding it.
  std::lock_guard lock(mu_);
  auto refill = [&] {
    const auto now = Clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_second_);
    last_ = now;
  };
  refill();
  if (tokens_ < 1.0) {
    sleep_(std::chrono::duration<double>((1.0 - tokens_) / rate_per_second_));
    refill();
    tokens_ = std::max(tokens_, 1.0);
  }
  tokens_ -= 1.0;
}

std::chrono::duration<double> backoff_delay(const BatchPolicy& policy, int failed_attempts) {
  return std::chrono::duration<double>(policy.backoff_base * std::pow(2.0, std::max(0, failed_attempts - 1)));
}

void parallel_for(std::size_t n, int max_concurrency, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, max_concurrency)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            job(i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::string_view to_string(GenerationOutcome::Status status) {
  switch (status) {
    case GenerationOutcome::Status::Ok: return "ok";
    case GenerationOutcome::Status::ParseFailed: return "parse_failed";
    case GenerationOutcome::Status::RequestFailed: return "request_failed";
  }
  return "unknown";
}

Json to_json(const GenerationOutcome& o) {
  Json j;
  j["doc_id"] = o.doc_id;
  j["status"] = to_string(o.status);
  j["attempts"] = o.attempts;
  if (o.quiz_set) j["quiz_set"] = quizforge::to_json(*o.quiz_set);
  if (!o.raw_text.empty()) j["raw_text"] = text::sanitize(o.raw_text);
  if (!o.error.empty()) j["error"] = text::sanitize(o.error);
  if (o.error_kind) j["error_kind"] = to_string(*o.error_kind);
  if (o.http_status) j["http_status"] = o.http_status;
  return j;
}

GenerationOutcome outcome_from_json(const Json& j) {
  GenerationOutcome o;
  try {
    o.doc_id = j.at("doc_id").get<std::string>();
    const auto status = j.at("status").get<std::string>();
    if (status == "ok") {
      o.status = GenerationOutcome::Status::Ok;
      o.quiz_set = from_json<QuizSet>(j.at("quiz_set"));
    } else if (status == "parse_failed") {
      o.status = GenerationOutcome::Status::ParseFailed;
    } else if (status == "request_failed") {
      o.status = GenerationOutcome::Status::RequestFailed;
    } else {
      throw ValidationError("status", fmt::format("unknown status '{}'", status));
    }
    o.attempts = j.value("attempts", 0);
    o.raw_text = j.value("raw_text", "");
    o.error = j.value("error", "");
    if (j.contains("error_kind")) o.error_kind = parse_error_kind(j.at("error_kind").get<std::string>());
    o.http_status = j.value("http_status", 0);
  } catch (const Json::exception& e) {
    throw ValidationError("$", fmt::format("malformed outcome: {}", e.what()));
  }
  return o;
}

std::vector<GenerationOutcome> read_checkpoint(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return {};
  std::map<std::string, std::size_t> index;
  std::vector<GenerationOutcome> latest;
  for (const auto& line : io::read_jsonl_lines(path)) {
    GenerationOutcome o;
    try {
      o = outcome_from_json(Json::parse(line.text));
    } catch (const std::exception& e) {
      // A crash can leave a torn final line; anything unreadable is redone.
      spdlog::warn("{}:{}: skipping unreadable checkpoint line ({})", path.string(), line.line_no, e.what());
      continue;
    }
    if (auto it = index.find(o.doc_id); it != index.end()) {
      latest[it->second] = std::move(o);
    } else {
      index.emplace(o.doc_id, latest.size());
      latest.push_back(std::move(o));
    }
  }
  return latest;
}

GenerationOutcome generate_with_policy(const std::string& doc_id, const std::string& prompt,
                                       const ExpectedShape& expected, const ModelConfig& cfg,
                                       const BatchPolicy& policy, ChatTransport& transport, RateLimiter& limiter,
                                       const BatchOptions& options) {
  GenerationOutcome out;
  out.doc_id = doc_id;
  const int budget = policy.max_retries + 1;
  bool regenerated = false;
  while (true) {
    limiter.acquire();
    ++out.attempts;
    std::string raw;
    try {
      raw = generate_one(prompt, cfg, transport, options.env);
    } catch (const RequestError& e) {
      if (e.retryable() && out.attempts < budget) {
        const auto delay = backoff_delay(policy, out.attempts);
        spdlog::debug("{}: attempt {} failed ({}), retrying in {:.2f}s", doc_id, out.attempts, e.what(), delay.count());
        options.sleep(delay);
        continue;
      }
      out.status = GenerationOutcome::Status::RequestFailed;
      out.error = e.what();
      out.error_kind = e.kind();
      out.http_status = e.http_status();
      return out;
    }
    try {
      QuizSet set = parse_quiz(raw, expected, doc_id);
      set.provenance.model = cfg.model_name;
      set.provenance.temperature = cfg.temperature;
      set.provenance.generated_at = options.timestamp ? options.timestamp() : std::string{};
      out.status = GenerationOutcome::Status::Ok;
      out.quiz_set = std::move(set);
      out.raw_text = std::move(raw);
      out.error.clear();
      return out;
    } catch (const ParseError& e) {
      if (!regenerated && out.attempts < budget) {
        regenerated = true;
        spdlog::debug("{}: unparsable output ({}), regenerating once", doc_id, e.what());
        continue;
      }
      out.status = GenerationOutcome::Status::ParseFailed;
      out.raw_text = raw;
      out.error = e.what();
      return out;
    }
  }
}

BatchResult run_batch(std::span<const SourceDocument> docs, const prompting::TemplateSet& templates,
                      const prompting::RenderParams& params, const ModelConfig& cfg, const BatchPolicy& policy,
                      ChatTransport& transport, const BatchOptions& options) {
  params.validate();
  cfg.validate();
  policy.validate();

  std::map<std::string, GenerationOutcome> done;
  std::unique_ptr<io::AppendLog> log;
  if (options.checkpoint) {
    for (auto& o : read_checkpoint(*options.checkpoint)) {
      if (o.ok()) done.insert_or_assign(o.doc_id, std::move(o));
    }
    log = std::make_unique<io::AppendLog>(*options.checkpoint);
  }

  const ExpectedShape expected{params.format,
                               params.format == QuizKind::Mcq ? params.options_per_question : 0,
                               params.num_questions};
  RateLimiter limiter(policy.requests_per_minute, std::min(policy.max_concurrency, policy.requests_per_minute),
                      options.sleep);

  BatchResult result;
  result.outcomes.resize(docs.size());
  std::vector<bool> resumed(docs.size(), false);
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (auto it = done.find(docs[i].id); it != done.end()) {
      result.outcomes[i] = it->second;
      resumed[i] = true;
    } else {
      pending.push_back(i);
    }
  }

  std::mutex callback_mu;
  parallel_for(pending.size(), policy.max_concurrency, [&](std::size_t k) {
    const auto i = pending[k];
    const auto& doc = docs[i];
    const std::string prompt = prompting::render(doc, params, templates);
    GenerationOutcome outcome =
        generate_with_policy(doc.id, prompt, expected, cfg, policy, transport, limiter, options);
    if (log) log->append(to_json(outcome).dump());
    {
      std::lock_guard lock(callback_mu);
      if (options.on_outcome) options.on_outcome(outcome);
    }
    result.outcomes[i] = std::move(outcome);
  });

  for (std::size_t i = 0; i < result.outcomes.size(); ++i) {
    switch (result.outcomes[i].status) {
      case GenerationOutcome::Status::Ok: ++result.summary.ok; break;
      case GenerationOutcome::Status::ParseFailed: ++result.summary.parse_failed; break;
      case GenerationOutcome::Status::RequestFailed: ++result.summary.request_failed; break;
    }
    if (resumed[i]) ++result.summary.resumed;
  }
  return result;
}

}  // namespace quizforge::generation
