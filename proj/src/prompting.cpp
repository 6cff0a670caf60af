#include "quizforge/prompting.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <vector>

#include "quizforge/assets.hpp"
#include "quizforge/io.hpp"
#include "quizforge/text.hpp"

namespace quizforge::prompting {

namespace fs = std::filesystem;

void RenderParams::validate() const {
  std::vector<Violation> v;
  if (num_questions <= 0) v.push_back({"num_questions", "must be positive"});
  if (format == QuizKind::Mcq && (options_per_question < kMinOptions || options_per_question > kMaxOptions)) {
    v.push_back({"options_per_question", fmt::format("must be in {}..{}", kMinOptions, kMaxOptions)});
  }
  if (!v.empty()) throw ValidationError(std::move(v));
}

TemplateSyntaxError::TemplateSyntaxError(std::string source, int line, const std::string& message)
    : Error(Category::Validation, fmt::format("{}:{}: {}", source, line, message)),
      source_(std::move(source)),
      line_(line) {}

void TemplateSet::add(PromptTemplate t) {
  if (!t.subject) {
    fallback_ = std::move(t);
  } else {
    const auto kind = t.subject->kind();
    by_subject_.insert_or_assign(kind, std::move(t));
  }
}

const PromptTemplate& TemplateSet::fallback() const {
  if (!fallback_) throw MissingFallback("template set");
  return *fallback_;
}

const PromptTemplate& TemplateSet::select(const Subject& subject) const {
  if (!subject.is_other()) {
    if (auto it = by_subject_.find(subject.kind()); it != by_subject_.end()) return it->second;
  }
  return fallback();
}

namespace {

struct Slot {
  std::size_t begin;  // offset of "{{"
  std::size_t end;    // one past "}}"
  std::string name;
  int line;
};

std::vector<Slot> scan_slots(std::string_view tmpl, const std::string& source) {
  std::vector<Slot> slots;
  std::size_t pos = 0;
  while ((pos = tmpl.find("{{", pos)) != std::string_view::npos) {
    const int line = 1 + static_cast<int>(std::count(tmpl.begin(), tmpl.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
    const auto close = tmpl.find("}}", pos + 2);
    const auto newline = tmpl.find('\n', pos + 2);
    if (close == std::string_view::npos || (newline != std::string_view::npos && newline < close)) {
      throw TemplateSyntaxError(source, line, "unterminated placeholder '{{'");
    }
    const std::string name(text::trim(tmpl.substr(pos + 2, close - pos - 2)));
    if (std::find(kPlaceholders.begin(), kPlaceholders.end(), name) == kPlaceholders.end()) {
      throw TemplateSyntaxError(source, line, fmt::format("unknown placeholder '{{{{{}}}}}'", name));
    }
    slots.push_back({pos, close + 2, name, line});
    pos = close + 2;
  }
  return slots;
}

}  // namespace

std::string substitute(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values,
                       const std::string& source) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t cursor = 0;
  for (const auto& slot : scan_slots(tmpl, source)) {
    out.append(tmpl.substr(cursor, slot.begin - cursor));
    auto it = values.find(slot.name);
    if (it == values.end()) {
      throw TemplateSyntaxError(source, slot.line, fmt::format("no value for '{}'", slot.name));
    }
    out += it->second;
    cursor = slot.end;
  }
  out.append(tmpl.substr(cursor));
  return out;
}

PromptTemplate parse_template(std::string source, std::string_view content, std::optional<Subject> subject) {
  const std::string normalized = text::sanitize(content);
  std::string_view body = normalized;
  std::string schema;
  if (const auto marker = body.find(kSchemaMarker); marker != std::string_view::npos) {
    schema = std::string(text::trim(body.substr(marker + kSchemaMarker.size())));
    body = body.substr(0, marker);
  }
  const auto slots = scan_slots(body, source);
  if (!schema.empty() && schema.find("{{") != std::string::npos) {
    const int line = 1 + static_cast<int>(std::count(normalized.begin(), normalized.end(), '\n'));
    throw TemplateSyntaxError(source, line, "placeholders are not allowed in the output_schema section");
  }
  for (std::string_view required : {"body", "num_questions"}) {
    const bool present = std::any_of(slots.begin(), slots.end(), [&](const Slot& s) { return s.name == required; });
    if (!present) {
      throw TemplateSyntaxError(source, 1, fmt::format("template must reference {{{{{}}}}}", required));
    }
  }
  PromptTemplate t;
  t.name = fs::path(source).stem().string();
  t.subject = std::move(subject);
  t.template_text = std::string(text::trim(body));
  t.output_schema = std::move(schema);
  return t;
}

namespace {

std::optional<Subject> subject_for_name(const std::string& stem, const std::string& source) {
  if (stem == "default") return std::nullopt;
  for (SubjectKind kind : named_subjects()) {
    Subject s(kind);
    if (s.slug() == stem) return s;
  }
  throw TemplateSyntaxError(source, 1, fmt::format("file name '{}' is not a subject slug or 'default'", stem));
}

}  // namespace

TemplateSet load_templates(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError(dir, "template directory does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".tmpl") files.push_back(entry.path());
  }
  if (ec) throw IoError(dir, "cannot list template directory");
  std::sort(files.begin(), files.end());
  TemplateSet set;
  for (const auto& f : files) {
    const std::string source = f.string();
    auto subject = subject_for_name(f.stem().string(), source);
    set.add(parse_template(source, io::read_file(f), std::move(subject)));
  }
  if (!set.has_fallback()) throw MissingFallback(dir.string());
  return set;
}

TemplateSet builtin_templates() {
  TemplateSet set;
  for (const auto& asset : assets::all()) {
    const fs::path p(asset.path);
    if (p.parent_path() != "templates" || p.extension() != ".tmpl") continue;
    const std::string source = "assets/" + std::string(asset.path);
    set.add(parse_template(source, asset.content, subject_for_name(p.stem().string(), source)));
  }
  if (!set.has_fallback()) throw MissingFallback("built-in templates");
  return set;
}

std::string format_phrase(QuizKind format, int options_per_question) {
  if (format == QuizKind::Saq) return "kısa cevaplı";
  return fmt::format("çoktan seçmeli ({} seçenekli)", options_per_question);
}

std::string default_output_schema(QuizKind format, int options_per_question) {
  if (format == QuizKind::Saq) {
    return "Yalnızca bir JSON dizisi döndür. Her eleman şu biçimde bir nesne olmalı:\n"
           "{\"question\": \"soru metni\", \"answer\": \"kısa ve net cevap\"}";
  }
  std::string labels;
  std::string example;
  for (int i = 0; i < options_per_question; ++i) {
    const char label = static_cast<char>('A' + i);
    if (i) {
      labels += ", ";
      example += ", ";
    }
    labels += label;
    example += fmt::format("\"{}\": \"seçenek\"", label);
  }
  return fmt::format(
      "Yalnızca bir JSON dizisi döndür. Her eleman şu biçimde bir nesne olmalı:\n"
      "{{\"question\": \"soru metni\", \"options\": {{{}}}, \"answer\": \"doğru seçeneğin harfi\"}}\n"
      "Her soruda tam olarak {} seçenek ({}) bulunmalı ve seçenek metinleri birbirinden farklı olmalı.",
      example, options_per_question, labels);
}

namespace {

/// Values must not smuggle placeholder syntax into the rendered prompt.
std::string defuse_braces(std::string s) {
  for (std::string_view pair : {"{{", "}}"}) {
    std::size_t pos = 0;
    while ((pos = s.find(pair, pos)) != std::string::npos) {
      s.insert(pos + 1, " ");
      pos += 2;
    }
  }
  return s;
}

}  // namespace

std::string render(const SourceDocument& doc, const RenderParams& params, const TemplateSet& templates) {
  params.validate();
  const PromptTemplate& t = templates.select(doc.subject);
  const std::map<std::string, std::string, std::less<>> values = {
      {"title", defuse_braces(doc.title)},
      {"body", defuse_braces(doc.body)},
      {"num_questions", std::to_string(params.num_questions)},
      {"format", format_phrase(params.format, params.options_per_question)},
      {"output_schema", t.output_schema.empty()
                            ? default_output_schema(params.format, params.options_per_question)
                            : t.output_schema},
  };
  return substitute(t.template_text, values, t.name);
}

}  // namespace quizforge::prompting
