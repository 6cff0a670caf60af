#include "quizforge/rouge.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#include "quizforge/text.hpp"

namespace quizforge::rouge {

namespace {

RougeScore from_counts(std::size_t overlap, std::size_t cand_total, std::size_t ref_total) {
  if (overlap == 0 || cand_total == 0 || ref_total == 0) return {};
  const auto o = static_cast<double>(overlap);
  return {o / static_cast<double>(cand_total), o / static_cast<double>(ref_total),
          2.0 * o / static_cast<double>(cand_total + ref_total)};
}

std::map<std::vector<int>, std::size_t> ngram_counts(const std::vector<int>& ids, int n) {
  std::map<std::vector<int>, std::size_t> counts;
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + un <= ids.size(); ++i) {
    ++counts[std::vector<int>(ids.begin() + static_cast<std::ptrdiff_t>(i),
                              ids.begin() + static_cast<std::ptrdiff_t>(i + un))];
  }
  return counts;
}

}  // namespace

Tokens normalize_tr(std::string_view text) { return text::word_tokens(text::turkish_lower(text)); }

RougeScore rouge_n(const Tokens& candidate, const Tokens& reference, int n) {
  if (n < 1) throw ValidationError("n", "ROUGE-N needs n >= 1");
  std::unordered_map<std::string_view, int> intern;
  auto ids = [&](const Tokens& toks) {
    std::vector<int> out;
    out.reserve(toks.size());
    for (const auto& t : toks) out.push_back(intern.try_emplace(t, static_cast<int>(intern.size())).first->second);
    return out;
  };
  const auto c_ids = ids(candidate);
  const auto r_ids = ids(reference);
  const auto un = static_cast<std::size_t>(n);
  const std::size_t c_total = c_ids.size() >= un ? c_ids.size() - un + 1 : 0;
  const std::size_t r_total = r_ids.size() >= un ? r_ids.size() - un + 1 : 0;
  if (c_total == 0 || r_total == 0) return {};
  const auto c_counts = ngram_counts(c_ids, n);
  const auto r_counts = ngram_counts(r_ids, n);
  std::size_t overlap = 0;
  for (const auto& [gram, count] : c_counts) {
    if (auto it = r_counts.find(gram); it != r_counts.end()) overlap += std::min(count, it->second);
  }
  return from_counts(overlap, c_total, r_total);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(const Tokens& candidate, const Tokens& reference) {
  return from_counts(lcs_length(candidate, reference), candidate.size(), reference.size());
}

RougeReport rouge_report(const Tokens& candidate, const Tokens& reference) {
  return {rouge_n(candidate, reference, 1), rouge_n(candidate, reference, 2), rouge_l(candidate, reference)};
}

std::string candidate_text(const QuizItem& item, bool include_options) {
  std::string out = item.stem;
  if (item.kind == QuizKind::Mcq) {
    if (include_options) {
      for (const auto& o : item.options) out += "\n" + o.text;
    }
  } else if (item.answer_text) {
    out += "\n" + *item.answer_text;
  }
  return out;
}

SetScore score_quiz(const QuizSet& qs, const SourceDocument& doc, bool include_options) {
  if (qs.doc_id != doc.id) throw DocMismatch(qs.doc_id, doc.id);
  const Tokens reference = normalize_tr(doc.body);
  SetScore out;
  double sum = 0.0;
  for (const auto& item : qs.items) {
    auto report = rouge_report(normalize_tr(candidate_text(item, include_options)), reference);
    sum += report.rougeL.f1;
    out.items.push_back({item.item_id, report});
  }
  out.mean_rouge_l_f1 = out.items.empty() ? 0.0 : sum / static_cast<double>(out.items.size());
  return out;
}

std::string_view to_string(Aggregate a) { return a == Aggregate::PerItem ? "per-item" : "mean-over-set"; }

Aggregate parse_aggregate(std::string_view s) {
  if (s == "per-item" || s == "per_item") return Aggregate::PerItem;
  if (s == "mean-over-set" || s == "mean_over_set" || s == "mean") return Aggregate::MeanOverSet;
  throw ValidationError("aggregate", fmt::format("unknown aggregate mode '{}'", s));
}

void GateConfig::validate() const {
  std::vector<Violation> v;
  if (!(min_rouge_l >= 0.0 && min_rouge_l <= 1.0)) {
    v.push_back({"min_rouge_l", fmt::format("threshold {} is outside [0, 1]", min_rouge_l)});
  }
  if (max_rouge_l) {
    if (!(*max_rouge_l >= 0.0 && *max_rouge_l <= 1.0)) {
      v.push_back({"max_rouge_l", fmt::format("threshold {} is outside [0, 1]", *max_rouge_l)});
    } else if (!(min_rouge_l < *max_rouge_l)) {
      v.push_back({"max_rouge_l", "must be greater than min_rouge_l"});
    }
  }
  if (!v.empty()) throw ValidationError(std::move(v));
}

bool within_gate(double f1, const GateConfig& cfg) {
  if (f1 + kGateTolerance < cfg.min_rouge_l) return false;
  if (cfg.max_rouge_l && f1 - kGateTolerance > *cfg.max_rouge_l) return false;
  return true;
}

GateResult quality_gate(const QuizSet& qs, const SourceDocument& doc, const GateConfig& cfg) {
  cfg.validate();
  GateResult out;
  out.scores = score_quiz(qs, doc, cfg.include_options);
  bool all = !out.scores.items.empty();
  for (const auto& item : out.scores.items) {
    const bool pass = within_gate(item.report.rougeL.f1, cfg);
    out.item_passed.push_back(pass);
    all = all && pass;
  }
  out.set_passed = cfg.aggregate == Aggregate::PerItem
                       ? all
                       : !out.scores.items.empty() && within_gate(out.scores.mean_rouge_l_f1, cfg);
  return out;
}

Json to_json(const RougeScore& s) { return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}}; }

Json to_json(const RougeReport& r) {
  return {{"rouge1", to_json(r.rouge1)}, {"rouge2", to_json(r.rouge2)}, {"rougeL", to_json(r.rougeL)}};
}

RougeScore score_from_json(const Json& j) {
  const auto optional_part = [&](const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.at(key).get<double>();
  };
  return {optional_part("precision"), optional_part("recall"), j.at("f1").get<double>()};
}

RougeReport report_from_json(const Json& j) {
  return {score_from_json(j.at("rouge1")), score_from_json(j.at("rouge2")), score_from_json(j.at("rougeL"))};
}

}  // namespace quizforge::rouge
