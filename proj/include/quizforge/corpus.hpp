#pragma once

// Intake of pre-fetched pages: cleaning, token counting, length filtering
// and corpus statistics.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quizforge/errors.hpp"
#include "quizforge/model.hpp"

namespace quizforge::corpus {

struct RawRecord {
  std::string source_url;
  std::optional<std::string> subject_hint;
  std::string raw_text;
  std::optional<std::string> title;
  std::optional<std::string> id;
};

enum class TokenizerKind { UnicodeWords, WhitespaceSplit };

std::string_view to_string(TokenizerKind kind);
TokenizerKind parse_tokenizer_kind(std::string_view s);

struct FilterConfig {
  std::int64_t min_tokens = 100;
  std::int64_t max_tokens = 3000;
  TokenizerKind tokenizer = TokenizerKind::UnicodeWords;

  /// Throws ValidationError unless 0 < min_tokens < max_tokens.
  void validate() const;
};

struct CleanOptions {
  /// Lines with fewer word tokens are dropped from multi-line records.
  int fragment_min_tokens = 3;
};

class EmptyAfterCleaning : public Error {
 public:
  EmptyAfterCleaning() : Error(Category::Validation, "nothing survived cleaning") {}
};

/// Strips HTML tags and entities, scheme-prefixed URLs, emoji and control
/// characters; collapses whitespace within lines; drops short fragment lines
/// of multi-line input. Idempotent. Throws EmptyAfterCleaning.
std::string clean(std::string_view raw, const CleanOptions& options = {});

std::size_t token_count(std::string_view text, TokenizerKind tokenizer);

enum class RejectReason { TooShort, TooLong };

std::string_view to_string(RejectReason reason);

struct Rejection {
  std::string doc_id;
  RejectReason reason = RejectReason::TooShort;
  std::int64_t token_count = 0;
};

struct FilterResult {
  std::vector<SourceDocument> kept;
  std::vector<Rejection> rejected;
};

/// Keeps documents with min_tokens <= token_count <= max_tokens, preserving
/// input order on both sides.
FilterResult filter_docs(std::span<const SourceDocument> docs, const FilterConfig& cfg);

struct SubjectShare {
  Subject subject;
  std::size_t count = 0;
  double percentage = 0.0;  // one decimal, shares sum to 100
};

/// Ordered by descending count, then by subject slug.
std::vector<SubjectShare> subject_distribution(std::span<const SourceDocument> docs);

struct TokenBucket {
  std::int64_t lower = 0;  // inclusive
  std::int64_t upper = 0;  // exclusive
  std::size_t count = 0;
};

/// Buckets of `bucket_width` starting at 0 and covering every document and
/// at least `[0, min_upper)`. Throws ValidationError if bucket_width <= 0.
std::vector<TokenBucket> token_histogram(std::span<const SourceDocument> docs, std::int64_t bucket_width,
                                         std::int64_t min_upper = 0);

// ---------------------------------------------------------------------------
// Ingestion

/// Reads a JSONL file of raw records, or a directory holding `*.jsonl`,
/// `*.json` (object or array) and `*.txt` files (subject hint = parent
/// directory name). Directory entries are visited in sorted order.
std::vector<RawRecord> read_raw_records(const std::filesystem::path& path);

RawRecord raw_record_from_json(const Json& j);

struct IngestFailure {
  std::string source;
  std::string reason;
};

struct IngestResult {
  std::vector<SourceDocument> docs;
  std::vector<IngestFailure> failures;
};

/// Cleans each record into a SourceDocument with a stable content-derived
/// id (`doc-<12 hex>` unless the record carries one), deduplicating ids.
IngestResult ingest(std::span<const RawRecord> records, const CleanOptions& clean_options,
                    TokenizerKind tokenizer);

}  // namespace quizforge::corpus
