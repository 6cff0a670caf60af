#include "quizforge/transform.hpp"

#include <fmt/format.h>

#include "quizforge/io.hpp"
#include "quizforge/text.hpp"

namespace quizforge::transform {

QuizSet mcq_to_saq(const QuizSet& qs) {
  if (qs.format != QuizKind::Mcq) throw InvalidInput(fmt::format("set {} is not multiple choice", qs.doc_id));
  QuizSet out;
  out.doc_id = qs.doc_id;
  out.format = QuizKind::Saq;
  out.provenance = qs.provenance;
  out.provenance.notes.emplace_back(kTransformNote);
  out.items.reserve(qs.items.size());
  for (const auto& item : qs.items) {
    if (item.kind != QuizKind::Mcq) throw InvalidInput(fmt::format("item {} is not multiple choice", item.item_id));
    const Option* correct = item.correct_option();
    if (!correct) throw InvalidInput(fmt::format("item {} has no usable correct_label", item.item_id));
    out.items.push_back(QuizItem::saq(item.item_id, item.stem, correct->text));
  }
  return out;
}

std::vector<std::string> lint_option_dependent_stems(const QuizSet& saq) {
  std::vector<std::string> flagged;
  for (const auto& item : saq.items) {
    if (text::turkish_lower(item.stem).find("aşağıdakilerden hangisi") != std::string::npos) {
      flagged.push_back(item.item_id);
    }
  }
  return flagged;
}

Json to_json(const TransformSummary& s) {
  Json errors = Json::array();
  for (const auto& e : s.errors) errors.push_back({{"line", e.line}, {"message", e.message}});
  return {{"sets", s.sets}, {"items", s.items}, {"errors", errors}, {"lint_warnings", s.lint_warnings}};
}

TransformSummary transform_corpus(const std::filesystem::path& in, const std::filesystem::path& out) {
  TransformSummary summary;
  std::string buffer;
  for (const auto& line : io::read_jsonl_lines(in)) {
    try {
      const auto saq = mcq_to_saq(deserialize<QuizSet>(line.text));
      buffer += serialize(saq);
      buffer += '\n';
      ++summary.sets;
      summary.items += saq.items.size();
      for (auto& id : lint_option_dependent_stems(saq)) summary.lint_warnings.push_back(std::move(id));
    } catch (const ValidationError& e) {
      std::string msg;
      for (const auto& v : e.violations()) msg += (msg.empty() ? "" : "; ") + v.path + ": " + v.message;
      summary.errors.push_back({line.line_no, msg});
    } catch (const InvalidInput& e) {
      summary.errors.push_back({line.line_no, e.what()});
    }
  }
  io::write_file_atomic(out, buffer);
  return summary;
}

}  // namespace quizforge::transform
