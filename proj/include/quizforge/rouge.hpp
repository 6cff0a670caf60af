#pragma once

// ROUGE-1/2/L over Turkish-normalized tokens and the faithfulness gate that
// checks generated questions against their source passage.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quizforge/errors.hpp"
#include "quizforge/model.hpp"

namespace quizforge::rouge {

using Tokens = std::vector<std::string>;

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const RougeScore&) const = default;
};

struct RougeReport {
  RougeScore rouge1;
  RougeScore rouge2;
  RougeScore rougeL;

  bool operator==(const RougeReport&) const = default;
};

/// NFC, Turkish lowercase, maximal alphanumeric runs.
Tokens normalize_tr(std::string_view text);

/// Clipped n-gram overlap. Scores are 0 when either side has no n-grams.
RougeScore rouge_n(const Tokens& candidate, const Tokens& reference, int n);

/// Whole-sequence longest common subsequence.
RougeScore rouge_l(const Tokens& candidate, const Tokens& reference);

std::size_t lcs_length(const Tokens& a, const Tokens& b);

RougeReport rouge_report(const Tokens& candidate, const Tokens& reference);

class DocMismatch : public Error {
 public:
  DocMismatch(const std::string& set_doc, const std::string& doc)
      : Error(Category::Validation, "quiz set belongs to " + set_doc + ", not " + doc) {}
};

struct ItemScore {
  std::string item_id;
  RougeReport report;
};

struct SetScore {
  std::vector<ItemScore> items;
  double mean_rouge_l_f1 = 0.0;  // over items; 0 for an empty set
};

/// Candidate text of an item: stem, then option texts (MCQ, when
/// `include_options`) or the answer (SAQ).
std::string candidate_text(const QuizItem& item, bool include_options = true);

SetScore score_quiz(const QuizSet& qs, const SourceDocument& doc, bool include_options = true);

enum class Aggregate { PerItem, MeanOverSet };

std::string_view to_string(Aggregate a);
Aggregate parse_aggregate(std::string_view s);

struct GateConfig {
  double min_rouge_l = 0.05;
  std::optional<double> max_rouge_l;
  Aggregate aggregate = Aggregate::PerItem;
  bool include_options = true;

  void validate() const;
};

/// Slack applied to threshold comparisons so a mean that equals the
/// threshold in exact arithmetic is not failed by rounding.
inline constexpr double kGateTolerance = 1e-12;

struct GateResult {
  SetScore scores;
  std::vector<bool> item_passed;
  bool set_passed = false;
};

bool within_gate(double rouge_l_f1, const GateConfig& cfg);

GateResult quality_gate(const QuizSet& qs, const SourceDocument& doc, const GateConfig& cfg);

Json to_json(const RougeScore& s);
Json to_json(const RougeReport& r);
/// `precision` and `recall` may be absent or null (read as NaN); `f1` is required.
RougeScore score_from_json(const Json& j);
RougeReport report_from_json(const Json& j);

}  // namespace quizforge::rouge
