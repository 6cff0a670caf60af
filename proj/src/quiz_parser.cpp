#include "quizforge/quiz_parser.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>

#include "quizforge/text.hpp"

namespace quizforge {

ParseError::ParseError(std::size_t offset, std::string reason)
    : Error(Category::Validation, fmt::format("parse error at byte {}: {}", offset, reason)),
      offset_(offset),
      reason_(std::move(reason)) {}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_upper_label(char c) { return c >= 'A' && c <= 'Z'; }

/// Validates one parsed item and converts the first violation to a ParseError.
void check_item(const QuizItem& item, std::size_t offset, const ExpectedShape& expected) {
  if (item.kind == QuizKind::Mcq && expected.options_per_question > 0 &&
      static_cast<int>(item.options.size()) != expected.options_per_question) {
    throw ParseError(offset, fmt::format("count mismatch: expected {} options, got {}",
                                         expected.options_per_question, item.options.size()));
  }
  const auto violations = validate(item);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw ParseError(offset, fmt::format("{}: {}", v.path, v.message));
  }
}

void check_count(std::size_t got, const ExpectedShape& expected) {
  if (got == 0) throw ParseError(0, "no questions found");
  if (expected.num_questions && static_cast<int>(got) != *expected.num_questions) {
    throw ParseError(0, fmt::format("count mismatch: expected {} questions, got {}", *expected.num_questions, got));
  }
}

/// Extracts a label from answer text such as "B", "B)", "(B)", "B) metin".
/// Returns 0 when the text does not start with a standalone letter.
char leading_label(std::string_view s) {
  s = text::trim(s);
  if (!s.empty() && s.front() == '(') s.remove_prefix(1);
  if (s.empty()) return 0;
  char c = s.front();
  if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  if (!is_upper_label(c)) return 0;
  if (s.size() == 1) return c;
  const char next = s[1];
  if (next == ')' || next == '.' || next == ':' || next == ' ' || next == '-' || next == ',') return c;
  return 0;
}

char resolve_answer(std::string_view answer, const QuizItem& item, std::size_t offset) {
  const char label = leading_label(answer);
  if (label != 0) {
    const bool known = std::any_of(item.options.begin(), item.options.end(),
                                   [&](const Option& o) { return o.label == label; });
    if (!known) {
      throw ParseError(offset, fmt::format("label out of range: answer '{}' with options A-{}", label,
                                           item.options.empty() ? 'A' : item.options.back().label));
    }
    return label;
  }
  const std::string wanted = text::nfc(text::trim(answer));
  for (const auto& o : item.options) {
    if (text::nfc(text::trim(o.text)) == wanted) return o.label;
  }
  throw ParseError(offset, fmt::format("answer '{}' is not an option label", wanted));
}

// ---------------------------------------------------------------------------
// JSON layout

/// Byte range of the first balanced JSON array/object, or npos.
std::pair<std::size_t, std::size_t> find_json_span(std::string_view s) {
  const auto start = s.find_first_of("[{");
  if (start == std::string_view::npos) return {std::string_view::npos, 0};
  int depth = 0;
  bool in_string = false;
  bool escape = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escape) escape = false;
      else if (c == '\\') escape = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '[' || c == '{') ++depth;
    else if (c == ']' || c == '}') {
      if (--depth == 0) return {start, i + 1};
    }
  }
  return {start, s.size()};
}

const Json* find_key(const Json& obj, std::initializer_list<std::string_view> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string lowered = text::turkish_lower(it.key());
    for (auto k : keys) {
      if (lowered == k) return &it.value();
    }
  }
  return nullptr;
}

std::string json_text(const Json& v) {
  if (v.is_string()) return std::string(text::trim(v.get<std::string>()));
  if (v.is_number()) return v.dump();
  return {};
}

/// Strips a leading "A) " style label when it matches the expected one.
std::string strip_option_label(std::string s, char expected) {
  std::string_view v = text::trim(s);
  if (v.size() >= 3 && v[0] == expected && (v[1] == ')' || v[1] == '.' || v[1] == ':')) {
    return std::string(text::trim(v.substr(2)));
  }
  return std::string(v);
}

QuizItem item_from_json(const Json& q, std::size_t index, std::size_t offset, const ExpectedShape& expected,
                        const std::string& doc_id) {
  if (!q.is_object()) throw ParseError(offset, fmt::format("question {} is not an object", index + 1));
  const Json* stem = find_key(q, {"question", "soru", "stem", "soru_metni", "soru metni"});
  if (!stem || json_text(*stem).empty()) throw ParseError(offset, fmt::format("question {} has no stem", index + 1));
  const Json* answer = find_key(q, {"answer", "cevap", "doğru_cevap", "dogru_cevap", "doğru cevap", "correct",
                                    "correct_answer", "correct_label", "answer_text", "yanıt"});
  if (!answer) throw ParseError(offset, fmt::format("missing answer line in question {}", index + 1));

  QuizItem item;
  item.item_id = make_item_id(doc_id, index);
  item.kind = expected.format;
  item.stem = text::nfc(json_text(*stem));

  if (expected.format == QuizKind::Saq) {
    item.answer_text = text::nfc(json_text(*answer));
    check_item(item, offset, expected);
    return item;
  }

  const Json* options = find_key(q, {"options", "seçenekler", "secenekler", "choices", "şıklar", "siklar"});
  if (!options) throw ParseError(offset, fmt::format("question {} has no options", index + 1));
  if (options->is_object()) {
    std::vector<std::pair<char, std::string>> labelled;
    for (auto it = options->begin(); it != options->end(); ++it) {
      const char label = leading_label(it.key());
      if (label == 0) throw ParseError(offset, fmt::format("invalid option label '{}'", it.key()));
      labelled.emplace_back(label, json_text(it.value()));
    }
    std::sort(labelled.begin(), labelled.end());
    for (std::size_t i = 0; i + 1 < labelled.size(); ++i) {
      if (labelled[i].first == labelled[i + 1].first) {
        throw ParseError(offset, fmt::format("duplicate label '{}'", labelled[i].first));
      }
    }
    for (auto& [label, t] : labelled) item.options.push_back({label, text::nfc(t)});
  } else if (options->is_array()) {
    char label = 'A';
    for (const auto& o : *options) {
      if (o.is_object()) {
        const Json* l = find_key(o, {"label", "harf"});
        const Json* t = find_key(o, {"text", "metin", "option"});
        const char got = l ? leading_label(json_text(*l)) : label;
        if (got != label) throw ParseError(offset, fmt::format("option label '{}' out of order", got ? got : '?'));
        item.options.push_back({label, text::nfc(t ? json_text(*t) : std::string{})});
      } else {
        item.options.push_back({label, text::nfc(strip_option_label(json_text(o), label))});
      }
      ++label;
    }
  } else {
    throw ParseError(offset, fmt::format("question {} options must be an object or array", index + 1));
  }
  item.correct_label = resolve_answer(json_text(*answer), item, offset);
  check_item(item, offset, expected);
  return item;
}

QuizSet parse_json_layout(const Json& root, std::size_t offset, const ExpectedShape& expected,
                          const std::string& doc_id) {
  const Json* questions = &root;
  if (root.is_object()) {
    if (const Json* inner = find_key(root, {"questions", "sorular", "items", "quiz"}); inner && inner->is_array()) {
      questions = inner;
    }
  }
  QuizSet set;
  set.doc_id = doc_id;
  set.format = expected.format;
  if (questions->is_array()) {
    for (std::size_t i = 0; i < questions->size(); ++i) {
      set.items.push_back(item_from_json((*questions)[i], i, offset, expected, doc_id));
    }
  } else if (questions->is_object()) {
    set.items.push_back(item_from_json(*questions, 0, offset, expected, doc_id));
  } else {
    throw ParseError(offset, "JSON root must be an array of questions");
  }
  check_count(set.items.size(), expected);
  return set;
}

// ---------------------------------------------------------------------------
// Lettered layout

std::string_view strip_markdown(std::string_view s) {
  s = text::trim(s);
  while (s.size() >= 2 && s.substr(0, 2) == "**") s = text::trim(s.substr(2));
  while (s.size() >= 2 && s.substr(s.size() - 2) == "**") s = text::trim(s.substr(0, s.size() - 2));
  while (!s.empty() && s.front() == '#') s = text::trim(s.substr(1));
  return s;
}

/// "12. Soru" / "12) Soru" / "Soru 12: ..." -> stem text.
std::optional<std::string_view> question_start(std::string_view s) {
  std::size_t i = 0;
  if (text::starts_with_icase(s, "soru")) {
    i = 4;
    while (i < s.size() && s[i] == ' ') ++i;
  }
  const std::size_t digits_begin = i;
  while (i < s.size() && is_digit(s[i])) ++i;
  if (i == digits_begin || i - digits_begin > 3) return std::nullopt;
  while (i < s.size() && s[i] == ' ') ++i;
  if (i >= s.size() || (s[i] != '.' && s[i] != ')' && s[i] != ':' && s[i] != '-')) return std::nullopt;
  ++i;
  if (i < s.size() && s[i] != ' ') return std::nullopt;
  return text::trim(s.substr(i));
}

/// "A) text", "A. text", "A: text", "(A) text" -> (label, text).
std::optional<std::pair<char, std::string_view>> option_line(std::string_view s) {
  std::size_t i = 0;
  bool paren = false;
  if (!s.empty() && s[0] == '(') {
    paren = true;
    i = 1;
  }
  if (i >= s.size() || !is_upper_label(s[i]) || s[i] > 'E') return std::nullopt;
  const char label = s[i++];
  if (i >= s.size()) return std::nullopt;
  if (paren) {
    if (s[i] != ')') return std::nullopt;
    ++i;
  } else {
    if (s[i] != ')' && s[i] != '.' && s[i] != ':') return std::nullopt;
    ++i;
  }
  if (i < s.size() && s[i] != ' ') return std::nullopt;
  const auto rest = text::trim(s.substr(i));
  if (rest.empty()) return std::nullopt;
  return std::pair{label, rest};
}

std::optional<std::string_view> answer_line(std::string_view s) {
  static constexpr std::array<std::string_view, 7> prefixes = {
      "doğru cevap", "dogru cevap", "cevap", "doğru yanıt", "yanıt", "answer", "correct answer"};
  const auto colon = s.find(':');
  if (colon == std::string_view::npos || colon > 24) return std::nullopt;
  std::string head = text::turkish_lower(text::trim(s.substr(0, colon)));
  if (std::find(prefixes.begin(), prefixes.end(), head) == prefixes.end()) return std::nullopt;
  return text::trim(strip_markdown(s.substr(colon + 1)));
}

struct Draft {
  std::size_t offset = 0;
  std::string stem;
  std::vector<Option> options;
  std::optional<std::string> answer;
  std::size_t answer_offset = 0;
};

QuizItem finish(Draft& d, std::size_t index, const ExpectedShape& expected, const std::string& doc_id) {
  QuizItem item;
  item.item_id = make_item_id(doc_id, index);
  item.kind = expected.format;
  item.stem = text::nfc(d.stem);
  if (!d.answer) throw ParseError(d.offset, fmt::format("missing answer line in question {}", index + 1));
  if (expected.format == QuizKind::Saq) {
    if (!d.options.empty()) throw ParseError(d.offset, "short-answer question has option lines");
    item.answer_text = text::nfc(*d.answer);
  } else {
    item.options = std::move(d.options);
    for (auto& o : item.options) o.text = text::nfc(o.text);
    item.correct_label = resolve_answer(*d.answer, item, d.answer_offset);
  }
  check_item(item, d.offset, expected);
  return item;
}

QuizSet parse_lettered_layout(std::string_view raw, const ExpectedShape& expected, const std::string& doc_id) {
  QuizSet set;
  set.doc_id = doc_id;
  set.format = expected.format;
  std::optional<Draft> current;
  std::size_t offset = 0;
  for (auto line : text::split_lines(raw)) {
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    const auto t = strip_markdown(line);
    if (t.empty() || t.substr(0, 3) == "```") continue;
    if (auto stem = question_start(t)) {
      if (current) set.items.push_back(finish(*current, set.items.size(), expected, doc_id));
      current = Draft{line_offset, std::string(*stem), {}, std::nullopt, 0};
      continue;
    }
    if (!current) continue;  // preamble
    if (auto ans = answer_line(t)) {
      if (current->answer) throw ParseError(line_offset, "duplicate answer line");
      current->answer = std::string(*ans);
      current->answer_offset = line_offset;
      continue;
    }
    if (current->answer) continue;  // trailing explanation
    if (auto opt = option_line(t)) {
      const char label = opt->first;
      const bool seen = std::any_of(current->options.begin(), current->options.end(),
                                    [&](const Option& o) { return o.label == label; });
      if (seen) throw ParseError(line_offset, fmt::format("duplicate label '{}'", label));
      const char want = static_cast<char>('A' + current->options.size());
      if (label != want) {
        throw ParseError(line_offset, fmt::format("option label '{}' out of order (expected '{}')", label, want));
      }
      current->options.push_back({label, std::string(opt->second)});
      continue;
    }
    if (current->options.empty()) {
      if (current->stem.empty()) {
        current->stem = std::string(t);
      } else {
        current->stem += "\n";
        current->stem += t;
      }
    } else {
      current->options.back().text += "\n";
      current->options.back().text += t;
    }
  }
  if (current) set.items.push_back(finish(*current, set.items.size(), expected, doc_id));
  check_count(set.items.size(), expected);
  return set;
}

std::string_view strip_fences(std::string_view raw, std::size_t& base) {
  base = 0;
  const auto fence = raw.find("```");
  if (fence == std::string_view::npos) return raw;
  const auto body_start = raw.find('\n', fence);
  if (body_start == std::string_view::npos) return raw;
  const auto close = raw.find("```", body_start + 1);
  base = body_start + 1;
  return raw.substr(body_start + 1, close == std::string_view::npos ? std::string_view::npos : close - body_start - 1);
}

}  // namespace

QuizSet parse_quiz(std::string_view raw, const ExpectedShape& expected, const std::string& doc_id) {
  std::size_t base = 0;
  const std::string_view body = strip_fences(raw, base);
  const auto [start, end] = find_json_span(body);

  std::optional<ParseError> json_error;
  if (start != std::string_view::npos) {
    // A lettered quiz may contain brackets; only commit to JSON when the
    // first bracket comes before any question line.
    const auto prefix_lines = text::split_lines(body.substr(0, start));
    const bool prose_first = std::any_of(prefix_lines.begin(), prefix_lines.end(), [](std::string_view l) {
      return question_start(strip_markdown(l)).has_value();
    });
    if (!prose_first) {
      Json root;
      bool syntax_ok = true;
      try {
        root = Json::parse(body.substr(start, end - start));
      } catch (const Json::parse_error& e) {
        syntax_ok = false;
        json_error.emplace(base + start + (e.byte > 0 ? e.byte - 1 : 0),
                           fmt::format("invalid JSON: {}", e.what()));
      }
      if (syntax_ok) return parse_json_layout(root, base + start, expected, doc_id);
    }
  }
  try {
    return parse_lettered_layout(raw, expected, doc_id);
  } catch (const ParseError& e) {
    if (json_error && e.reason() == "no questions found") throw *json_error;
    throw;
  }
}

std::string format_quiz(const QuizSet& set, QuizLayout layout) {
  if (layout == QuizLayout::Json) {
    Json arr = Json::array();
    for (const auto& item : set.items) {
      Json q;
      q["question"] = item.stem;
      if (item.kind == QuizKind::Mcq) {
        Json opts = Json::object();
        for (const auto& o : item.options) opts[std::string(1, o.label)] = o.text;
        q["options"] = std::move(opts);
        q["answer"] = item.correct_label ? std::string(1, *item.correct_label) : std::string{};
      } else {
        q["answer"] = item.answer_text.value_or("");
      }
      arr.push_back(std::move(q));
    }
    return arr.dump(2);
  }
  std::string out;
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    const auto& item = set.items[i];
    if (i) out += "\n";
    out += fmt::format("{}. {}\n", i + 1, item.stem);
    if (item.kind == QuizKind::Mcq) {
      for (const auto& o : item.options) out += fmt::format("{}) {}\n", o.label, o.text);
      out += fmt::format("{} {}\n", kAnswerPrefix, item.correct_label ? std::string(1, *item.correct_label) : "");
    } else {
      out += fmt::format("{} {}\n", kAnswerPrefix, item.answer_text.value_or(""));
    }
  }
  return out;
}

}  // namespace quizforge
