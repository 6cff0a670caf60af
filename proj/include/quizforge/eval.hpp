#pragma once

// Model evaluation against the eval split, comparison reports, review
// sampling, the annotation log and rating aggregation.

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quizforge/dataset.hpp"
#include "quizforge/errors.hpp"
#include "quizforge/generation.hpp"
#include "quizforge/io.hpp"
#include "quizforge/model.hpp"
#include "quizforge/rouge.hpp"

namespace quizforge::eval {

struct EvalRunConfig {
  generation::ModelConfig model;
  generation::BatchPolicy policy;
  std::filesystem::path eval_set;
  QuizKind format = QuizKind::Mcq;
  std::string label;
  /// Row name in reports; defaults to model.model_name.
  std::string display_name;

  void validate() const;
};

/// Text that is scored for a parsed quiz: per item the stem, the option
/// texts and the answer text, one per line. Layout scaffolding (numbers,
/// letters, "Cevap:") is left out so it cannot inflate overlap.
std::string content_text(const QuizSet& qs);

struct ItemResult {
  std::string record_id;
  std::string generated_text;
  bool parsed_ok = false;
  std::string status;  // ok | parse_failed | request_failed
  std::string error;
  int attempts = 0;
  std::optional<rouge::RougeReport> scores;

  bool operator==(const ItemResult&) const = default;
};

struct EvalResult {
  std::string model;
  std::string label;
  QuizKind format = QuizKind::Mcq;
  std::vector<ItemResult> items;
  rouge::RougeReport means;  // over scored items; zero when none
  std::size_t total = 0;
  std::size_t scored = 0;
  std::size_t parse_failed = 0;
  std::size_t request_failed = 0;

  bool operator==(const EvalResult&) const = default;
};

/// Arithmetic means of precision, recall and f1 over the scored items.
rouge::RougeReport mean_scores(std::span<const ItemResult> items);

Json to_json(const EvalResult& r);
/// Accepts summary-only results (no items) so published numbers can be
/// rendered alongside local runs.
EvalResult eval_result_from_json(const Json& j);
EvalResult read_eval_result(const std::filesystem::path& path);
/// One result per line for `.jsonl` files, otherwise a single result.
std::vector<EvalResult> read_eval_results(const std::filesystem::path& path);

/// Sends instruction + blank line + input for every record of the
/// requested format and scores the parsed reply against the stored output.
EvalResult evaluate_model(const EvalRunConfig& cfg, generation::ChatTransport& transport,
                          const generation::BatchOptions& options = {});

// ---------------------------------------------------------------------------
// Reports

struct ComparisonRow {
  std::string name;  // "<model> <label>"
  QuizKind format = QuizKind::Mcq;
  double rouge1 = 0.0;  // f1 x 100
  double rouge2 = 0.0;
  double rougeL = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;  // input order
};

ComparisonTable compare_runs(std::span<const EvalResult> results);

/// "<name>: r1 / r2 / rL" lines, two decimals.
std::string render_text(const ComparisonTable& t);
std::string render_markdown(const ComparisonTable& t);
std::string render_html(const ComparisonTable& t);
Json render_json(const ComparisonTable& t);

// ---------------------------------------------------------------------------
// Review sampling

class InsufficientItems : public Error {
 public:
  explicit InsufficientItems(const std::string& what) : Error(Category::Validation, what) {}
};

/// Items drawn without replacement, regrouped into per-document sets in
/// corpus order. Stratified sampling allocates n evenly across subjects
/// (sorted by slug), handing shortfalls to subjects with items to spare.
std::vector<QuizSet> sample_for_review(std::span<const QuizSet> sets, std::span<const SourceDocument> corpus,
                                       std::size_t n, std::uint64_t seed, bool stratify_by_subject = false);

// ---------------------------------------------------------------------------
// Annotations

using AnnotationKey = std::pair<std::string, std::string>;  // item_id, annotator_id

/// True when `a` supersedes `b` for the same key: later timestamp, ties
/// broken on rating letter then comment so the result is order-independent.
bool supersedes(const Annotation& a, const Annotation& b);

std::map<AnnotationKey, Annotation> effective_annotations(std::span<const Annotation> log);

/// Append-only annotation log with a latest-wins view. Appends are
/// serialized and synced before returning; readers get immutable snapshots.
class AnnotationStore {
 public:
  using Snapshot = std::map<AnnotationKey, Annotation>;

  /// Opens (creating if needed) the log; unreadable lines are skipped.
  explicit AnnotationStore(const std::filesystem::path& path);

  void append(const Annotation& a);
  std::shared_ptr<const Snapshot> snapshot() const;
  std::size_t log_size() const;
  std::size_t skipped_lines() const noexcept { return skipped_; }
  const std::filesystem::path& path() const noexcept { return log_.path(); }

 private:
  io::AppendLog log_;
  mutable std::mutex mu_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::size_t log_size_ = 0;
  std::size_t skipped_ = 0;
};

struct RatingDistribution {
  std::array<std::size_t, 5> counts{};
  std::array<double, 5> percentages{};
  std::size_t total = 0;
  std::map<std::string, RatingDistribution> per_annotator;

  std::size_t count(Rating r) const { return counts[static_cast<std::size_t>(r)]; }
  double percentage(Rating r) const { return percentages[static_cast<std::size_t>(r)]; }
};

RatingDistribution aggregate_ratings(std::span<const Annotation> log);
RatingDistribution aggregate_ratings(const AnnotationStore& store);
Json to_json(const RatingDistribution& d);

/// Shipped five-point rubric (JSON).
std::string_view rubric_json();

}  // namespace quizforge::eval
