#pragma once

// MCQ -> SAQ derivation: keep the stem, keep the correct option's text as
// the answer, drop the distractors.

#include <filesystem>
#include <string>
#include <vector>

#include "quizforge/errors.hpp"
#include "quizforge/model.hpp"

namespace quizforge::transform {

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(Category::Validation, what) {}
};

inline constexpr std::string_view kTransformNote = "transform: mcq-to-saq";

QuizSet mcq_to_saq(const QuizSet& qs);

/// Item ids whose stem presupposes options ("aşağıdakilerden hangisi").
std::vector<std::string> lint_option_dependent_stems(const QuizSet& saq);

struct RecordError {
  std::size_t line = 0;
  std::string message;
};

struct TransformSummary {
  std::size_t sets = 0;
  std::size_t items = 0;
  std::vector<RecordError> errors;
  std::vector<std::string> lint_warnings;  // item ids
};

Json to_json(const TransformSummary& s);

/// Converts every MCQ set of a JSONL file. Bad records are reported and
/// skipped; the output is written atomically.
TransformSummary transform_corpus(const std::filesystem::path& in, const std::filesystem::path& out);

}  // namespace quizforge::transform
