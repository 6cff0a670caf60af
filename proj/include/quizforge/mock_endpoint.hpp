#pragma once

// Deterministic stand-in for a chat-completions endpoint, addressed as
// `mock://<mode>?key=value&...`:
//
//   mock://quiz[?n=5&options=5&format=mcq]  builds a quiz from the passage in
//                                           the prompt (count/format are read
//                                           from the prompt when omitted)
//   mock://reference?path=eval.jsonl        returns the `output` of the record
//                                           whose `instruction` and `input`
//                                           both occur in the prompt
//   mock://fixed?text=...                   always the given text
//   mock://echo                             the prompt itself
//   mock://garbage                          unparsable prose
//   mock://status?code=503                  always that HTTP status
//   mock://flaky?fail=2                     503 for the first `fail` requests
//                                           of each prompt, then quiz mode

#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "quizforge/generation.hpp"

namespace quizforge::generation {

class MockEndpoint : public ChatTransport {
 public:
  /// Throws ValidationError for unknown modes or missing parameters.
  explicit MockEndpoint(const std::string& url);

  HttpResponse post_json(const std::string& url, const std::string& body, const Headers& headers,
                         std::chrono::milliseconds timeout) override;

  /// Answers one chat-completions request body.
  HttpResponse respond(std::string_view request_body);

  const std::string& mode() const noexcept { return mode_; }

 private:
  std::string quiz_for(std::string_view prompt) const;

  std::string mode_;
  std::map<std::string, std::string> params_;
  struct Reference {
    std::string instruction;
    std::string input;
    std::string output;
  };

  std::vector<Reference> references_;
  std::mutex mu_;
  std::map<std::string, int> seen_;
};

/// Serves a MockEndpoint over HTTP: POST to any path ending in
/// `/chat/completions`.
class MockServer {
 public:
  explicit MockServer(MockEndpoint& endpoint);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Port 0 picks a free port; returns the bound port or throws IoError.
  int bind(const std::string& host, int port);
  void listen();
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

/// Text between the passage delimiters, or the whole prompt.
std::string_view passage_from_prompt(std::string_view prompt);

/// A quiz in the JSON layout built only from `passage`: each stem blanks the
/// longest word of one sentence, distractors are other passage words.
std::string mock_quiz(std::string_view passage, int num_questions, int options_per_question, QuizKind format);

/// Wraps content as a chat-completions response body.
std::string chat_completion_body(std::string_view content, std::string_view model);

}  // namespace quizforge::generation
