#pragma once

// Turning model output into QuizSets and back.
//
// Two layouts are understood. The primary one is a JSON array of question
// objects:
//
//   [{"question": "...", "options": {"A": "...", "B": "..."}, "answer": "B"}]
//   [{"question": "...", "answer": "..."}]                       (short answer)
//
// The fallback is the lettered plain-text layout used in Turkish exams:
//
//   1. Soru metni?
//   A) birinci seçenek
//   B) ikinci seçenek
//   Cevap: B
//
// with "Doğru Cevap:" also accepted as the answer line.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "quizforge/errors.hpp"
#include "quizforge/model.hpp"

namespace quizforge {

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string reason);
  std::size_t offset() const noexcept { return offset_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t offset_;
  std::string reason_;
};

struct ExpectedShape {
  QuizKind format = QuizKind::Mcq;
  /// 0 accepts any count in 2..5.
  int options_per_question = 0;
  std::optional<int> num_questions;
};

enum class QuizLayout { Json, Lettered };

/// Parses `raw` (JSON first, lettered fallback) into a QuizSet whose items
/// are numbered `doc_id#0`, `doc_id#1`, ... Every item is validated.
QuizSet parse_quiz(std::string_view raw, const ExpectedShape& expected, const std::string& doc_id);

/// Renders items in the requested layout; parse_quiz inverts it.
std::string format_quiz(const QuizSet& set, QuizLayout layout);

/// Answer-line prefix written by format_quiz.
inline constexpr std::string_view kAnswerPrefix = "Cevap:";

}  // namespace quizforge
