#pragma once

// Subject-aware prompt templates. A template is UTF-8 text with
// `{{placeholder}}` slots drawn from a fixed set; files are named after the
// subject slug (`history.tmpl`) and `default.tmpl` is the fallback.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "quizforge/errors.hpp"
#include "quizforge/model.hpp"

namespace quizforge::prompting {

inline constexpr std::array<std::string_view, 5> kPlaceholders = {"title", "body", "num_questions",
                                                                  "format", "output_schema"};

/// Separates the prompt from an optional custom output-schema section.
inline constexpr std::string_view kSchemaMarker = "=== output_schema ===";

struct RenderParams {
  int num_questions = 5;
  QuizKind format = QuizKind::Mcq;
  int options_per_question = 5;

  void validate() const;
};

struct PromptTemplate {
  std::string name;
  std::optional<Subject> subject;  // nullopt for the fallback
  std::string template_text;
  /// Empty means the built-in schema for the requested format is used.
  std::string output_schema;
};

class TemplateSyntaxError : public Error {
 public:
  TemplateSyntaxError(std::string source, int line, const std::string& message);
  const std::string& source() const noexcept { return source_; }
  int line() const noexcept { return line_; }

 private:
  std::string source_;
  int line_;
};

class MissingFallback : public Error {
 public:
  explicit MissingFallback(const std::string& where)
      : Error(Category::Validation, where + ": no default.tmpl fallback template") {}
};

class TemplateSet {
 public:
  TemplateSet() = default;

  void add(PromptTemplate t);
  bool has_fallback() const noexcept { return fallback_.has_value(); }
  const PromptTemplate& fallback() const;
  /// Subject-specific template when present, the fallback otherwise.
  const PromptTemplate& select(const Subject& subject) const;
  std::size_t size() const noexcept { return by_subject_.size() + (fallback_ ? 1 : 0); }
  const std::map<SubjectKind, PromptTemplate>& subject_templates() const noexcept { return by_subject_; }

 private:
  std::optional<PromptTemplate> fallback_;
  std::map<SubjectKind, PromptTemplate> by_subject_;
};

/// Validates placeholders; `source` is used in error messages.
PromptTemplate parse_template(std::string source, std::string_view content, std::optional<Subject> subject);

/// Loads every `*.tmpl` file in `dir`. Throws TemplateSyntaxError,
/// MissingFallback or IoError.
TemplateSet load_templates(const std::filesystem::path& dir);

/// The templates shipped under assets/templates, compiled in.
TemplateSet builtin_templates();

std::string default_output_schema(QuizKind format, int options_per_question);
std::string format_phrase(QuizKind format, int options_per_question);

/// Replaces `{{name}}` slots; unknown names are a TemplateSyntaxError.
std::string substitute(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values,
                       const std::string& source = "<template>");

std::string render(const SourceDocument& doc, const RenderParams& params, const TemplateSet& templates);

/// Passage delimiters used by the shipped templates.
inline constexpr std::string_view kPassageOpen = "<metin>";
inline constexpr std::string_view kPassageClose = "</metin>";

}  // namespace quizforge::prompting
