#pragma once

// Canonical domain types shared by every pipeline stage, plus their JSON
// (de)serialization. Objects serialize with sorted keys and NFC text, one
// object per line in JSONL files; see docs/schemas.md.

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "quizforge/errors.hpp"

namespace quizforge {

using Json = nlohmann::json;

enum class SubjectKind {
  Chemistry,
  Biology,
  Geography,
  Philosophy,
  TurkishLiterature,
  History,
  Other,
};

class Subject {
 public:
  Subject() = default;
  explicit Subject(SubjectKind kind);
  static Subject other(std::string label);

  /// Accepts the canonical slug (`history`, `turkish_literature`, ...) or
  /// `other:<label>`.
  static Subject from_slug(std::string_view slug);
  /// Lenient mapping of free-form hints ("Tarih", "biyoloji", "Türk Edebiyatı",
  /// "History"); unrecognised non-empty hints become Other(hint).
  static Subject from_hint(std::string_view hint);

  SubjectKind kind() const noexcept { return kind_; }
  const std::string& label() const noexcept { return label_; }
  bool is_other() const noexcept { return kind_ == SubjectKind::Other; }

  std::string slug() const;
  std::string display_name() const;
  std::string turkish_name() const;

  auto operator<=>(const Subject&) const = default;

 private:
  SubjectKind kind_ = SubjectKind::Other;
  std::string label_ = "Genel";
};

const std::vector<SubjectKind>& named_subjects();

enum class QuizKind { Mcq, Saq };

std::string_view to_string(QuizKind kind);
QuizKind parse_quiz_kind(std::string_view s);

struct Option {
  char label = 'A';
  std::string text;

  bool operator==(const Option&) const = default;
};

inline constexpr int kMinOptions = 2;
inline constexpr int kMaxOptions = 5;

struct QuizItem {
  std::string item_id;
  QuizKind kind = QuizKind::Mcq;
  std::string stem;
  std::vector<Option> options;        // MCQ only
  std::optional<char> correct_label;  // MCQ only
  std::optional<std::string> answer_text;  // SAQ only

  static QuizItem mcq(std::string item_id, std::string stem, std::vector<std::string> option_texts,
                      char correct_label);
  static QuizItem saq(std::string item_id, std::string stem, std::string answer);

  /// Nullptr for SAQ items or when the label does not resolve.
  const Option* correct_option() const;

  bool operator==(const QuizItem&) const = default;
};

std::string make_item_id(std::string_view doc_id, std::size_t index);

struct Provenance {
  std::string model;
  double temperature = 0.0;
  std::string generated_at;
  std::vector<std::string> notes;

  bool operator==(const Provenance&) const = default;
};

struct QuizSet {
  std::string doc_id;
  QuizKind format = QuizKind::Mcq;
  std::vector<QuizItem> items;
  Provenance provenance;

  bool operator==(const QuizSet&) const = default;
};

struct SourceDocument {
  std::string id;
  Subject subject;
  std::string title;
  std::string body;
  std::optional<std::string> source_url;
  std::int64_t token_count = 0;

  bool operator==(const SourceDocument&) const = default;
};

enum class Rating { A, B, C, D, E };

inline constexpr std::strong_ordering operator<=>(Rating a, Rating b) {
  // A is the best grade, so it compares greatest.
  return static_cast<int>(b) <=> static_cast<int>(a);
}
inline constexpr bool operator<(Rating a, Rating b) { return (a <=> b) < 0; }
inline constexpr bool operator>(Rating a, Rating b) { return (a <=> b) > 0; }
inline constexpr bool operator<=(Rating a, Rating b) { return (a <=> b) <= 0; }
inline constexpr bool operator>=(Rating a, Rating b) { return (a <=> b) >= 0; }

inline constexpr std::array<Rating, 5> kAllRatings = {Rating::A, Rating::B, Rating::C, Rating::D,
                                                      Rating::E};

char to_char(Rating r);
std::optional<Rating> parse_rating(std::string_view s);

/// Millisecond-resolution UTC instant, rendered as `YYYY-MM-DDTHH:MM:SS[.mmm]Z`.
struct UtcTime {
  std::chrono::sys_time<std::chrono::milliseconds> value{};

  static std::optional<UtcTime> parse(std::string_view s);
  static UtcTime now();
  std::string to_string() const;

  auto operator<=>(const UtcTime&) const = default;
};

struct Annotation {
  std::string item_id;
  std::string annotator_id;
  Rating rating = Rating::A;
  UtcTime timestamp;
  std::optional<std::string> comment;

  bool operator==(const Annotation&) const = default;
};

// ---------------------------------------------------------------------------
// Validation. Each returns every violation; an empty vector means valid.

std::vector<Violation> validate(const QuizItem& item, const std::string& path = "");
std::vector<Violation> validate(const QuizSet& set, const std::string& path = "");
std::vector<Violation> validate(const SourceDocument& doc, const std::string& path = "");
std::vector<Violation> validate(const Annotation& a, const std::string& path = "");

// ---------------------------------------------------------------------------
// JSON mapping.

Json to_json(const Subject& s);
Json to_json(const QuizItem& item);
Json to_json(const Provenance& p);
Json to_json(const QuizSet& set);
Json to_json(const SourceDocument& doc);
Json to_json(const Annotation& a);

/// Throws ValidationError listing all violations.
template <class T>
T from_json(const Json& j);

template <class T>
std::string serialize(const T& value) {
  return to_json(value).dump();
}

/// Parses and validates. Syntax errors are reported at path "$".
template <class T>
T deserialize(std::string_view text);

template <> QuizItem from_json<QuizItem>(const Json& j);
template <> QuizSet from_json<QuizSet>(const Json& j);
template <> SourceDocument from_json<SourceDocument>(const Json& j);
template <> Annotation from_json<Annotation>(const Json& j);
template <> QuizItem deserialize<QuizItem>(std::string_view text);
template <> QuizSet deserialize<QuizSet>(std::string_view text);
template <> SourceDocument deserialize<SourceDocument>(std::string_view text);
template <> Annotation deserialize<Annotation>(std::string_view text);

}  // namespace quizforge
