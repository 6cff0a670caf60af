#include "quizforge/model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "quizforge/text.hpp"

namespace quizforge {

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(Category::Validation,
            [&] {
              std::string msg = "validation failed";
              for (const auto& v : violations) {
                msg += fmt::format("; {}: {}", v.path.empty() ? "$" : v.path, v.message);
              }
              return msg;
            }()),
      violations_(std::move(violations)) {}

ValidationError::ValidationError(std::string path, std::string message)
    : ValidationError(std::vector<Violation>{{std::move(path), std::move(message)}}) {}

bool ValidationError::has_path(std::string_view path) const {
  return std::any_of(violations_.begin(), violations_.end(),
                     [&](const Violation& v) { return v.path == path; });
}

namespace {

std::string join_path(const std::string& base, std::string_view field) {
  if (base.empty()) return std::string(field);
  return base + "." + std::string(field);
}

std::string index_path(const std::string& base, std::string_view field, std::size_t i) {
  return fmt::format("{}[{}]", join_path(base, field), i);
}

struct SubjectName {
  SubjectKind kind;
  std::string_view slug;
  std::string_view english;
  std::string_view turkish;
};

constexpr std::array<SubjectName, 6> kSubjectNames = {{
    {SubjectKind::Chemistry, "chemistry", "Chemistry", "Kimya"},
    {SubjectKind::Biology, "biology", "Biology", "Biyoloji"},
    {SubjectKind::Geography, "geography", "Geography", "Coğrafya"},
    {SubjectKind::Philosophy, "philosophy", "Philosophy", "Felsefe"},
    {SubjectKind::TurkishLiterature, "turkish_literature", "Turkish Literature",
     "Türk Edebiyatı"},
    {SubjectKind::History, "history", "History", "Tarih"},
}};

const SubjectName* find_name(SubjectKind kind) {
  for (const auto& n : kSubjectNames) {
    if (n.kind == kind) return &n;
  }
  return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Subject

Subject::Subject(SubjectKind kind) : kind_(kind) {
  if (kind != SubjectKind::Other) label_.clear();
}

Subject Subject::other(std::string label) {
  Subject s;
  s.kind_ = SubjectKind::Other;
  s.label_ = text::sanitize(text::trim(label));
  return s;
}

Subject Subject::from_slug(std::string_view slug) {
  for (const auto& n : kSubjectNames) {
    if (slug == n.slug) return Subject(n.kind);
  }
  constexpr std::string_view prefix = "other:";
  if (slug.substr(0, prefix.size()) == prefix) {
    auto label = text::trim(slug.substr(prefix.size()));
    if (label.empty()) throw ValidationError("subject", "Other subject requires a non-empty label");
    return other(std::string(label));
  }
  throw ValidationError("subject", fmt::format("unknown subject slug '{}'", slug));
}

Subject Subject::from_hint(std::string_view hint) {
  std::string h = text::turkish_lower(text::trim(hint));
  if (h.empty()) return Subject{};
  if (h.rfind("other:", 0) != 0) std::replace_if(h.begin(), h.end(), [](char c) { return c == '_' || c == '-'; }, ' ');
  struct Alias {
    std::string_view text;
    SubjectKind kind;
  };
  static constexpr std::array<Alias, 18> aliases = {{
      {"chemistry", SubjectKind::Chemistry},
      {"kimya", SubjectKind::Chemistry},
      {"biology", SubjectKind::Biology},
      {"biyoloji", SubjectKind::Biology},
      {"geography", SubjectKind::Geography},
      {"coğrafya", SubjectKind::Geography},
      {"cografya", SubjectKind::Geography},
      {"philosophy", SubjectKind::Philosophy},
      {"felsefe", SubjectKind::Philosophy},
      {"turkish literature", SubjectKind::TurkishLiterature},
      {"türk edebiyatı", SubjectKind::TurkishLiterature},
      {"turk edebiyati", SubjectKind::TurkishLiterature},
      {"türk dili ve edebiyatı", SubjectKind::TurkishLiterature},
      {"edebiyat", SubjectKind::TurkishLiterature},
      {"history", SubjectKind::History},
      {"tarih", SubjectKind::History},
      {"ınkılap tarihi", SubjectKind::History},
      {"inkılap tarihi", SubjectKind::History},
  }};
  const auto fold_dotless = [](std::string_view in) {
    std::string out;
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (in.compare(i, 2, "ı") == 0) {
        out += 'i';
        ++i;
      } else {
        out += in[i];
      }
    }
    return out;
  };
  const auto folded = fold_dotless(h);
  for (const auto& a : aliases) {
    if (h == a.text || folded == fold_dotless(a.text)) return Subject(a.kind);
  }
  if (h.rfind("other:", 0) == 0) return from_slug(hint);
  return other(std::string(text::trim(hint)));
}

std::string Subject::slug() const {
  if (const auto* n = find_name(kind_)) return std::string(n->slug);
  return "other:" + label_;
}

std::string Subject::display_name() const {
  if (const auto* n = find_name(kind_)) return std::string(n->english);
  return label_;
}

std::string Subject::turkish_name() const {
  if (const auto* n = find_name(kind_)) return std::string(n->turkish);
  return label_;
}

const std::vector<SubjectKind>& named_subjects() {
  static const std::vector<SubjectKind> kinds = [] {
    std::vector<SubjectKind> v;
    for (const auto& n : kSubjectNames) v.push_back(n.kind);
    return v;
  }();
  return kinds;
}

// ---------------------------------------------------------------------------
// QuizKind, Rating, UtcTime

std::string_view to_string(QuizKind kind) { return kind == QuizKind::Mcq ? "mcq" : "saq"; }

QuizKind parse_quiz_kind(std::string_view s) {
  const std::string lower = text::turkish_lower(s);
  if (lower == "mcq") return QuizKind::Mcq;
  if (lower == "saq") return QuizKind::Saq;
  throw ValidationError("format", fmt::format("unknown quiz format '{}' (expected mcq or saq)", s));
}

char to_char(Rating r) { return static_cast<char>('A' + static_cast<int>(r)); }

std::optional<Rating> parse_rating(std::string_view s) {
  if (s.size() != 1 || s[0] < 'A' || s[0] > 'E') return std::nullopt;
  return static_cast<Rating>(s[0] - 'A');
}

std::optional<UtcTime> UtcTime::parse(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS[.fff]Z
  auto digits = [&](std::size_t pos, std::size_t n, int& out) {
    if (pos + n > s.size()) return false;
    out = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
      out = out * 10 + (s[i] - '0');
    }
    return true;
  };
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, ms = 0;
  if (s.size() < 20) return std::nullopt;
  if (!digits(0, 4, y) || s[4] != '-' || !digits(5, 2, mo) || s[7] != '-' || !digits(8, 2, d) ||
      (s[10] != 'T' && s[10] != 't') || !digits(11, 2, h) || s[13] != ':' || !digits(14, 2, mi) ||
      s[16] != ':' || !digits(17, 2, sec)) {
    return std::nullopt;
  }
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    int frac = 0;
    int scale = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (scale < 3) {
        frac = frac * 10 + (s[pos] - '0');
        ++scale;
      }
      ++pos;
    }
    if (pos == start) return std::nullopt;
    while (scale < 3) {
      frac *= 10;
      ++scale;
    }
    ms = frac;
  }
  if (pos + 1 != s.size() || (s[pos] != 'Z' && s[pos] != 'z')) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return std::nullopt;
  UtcTime t;
  t.value = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} + milliseconds{ms};
  return t;
}

UtcTime UtcTime::now() {
  using namespace std::chrono;
  return UtcTime{time_point_cast<milliseconds>(system_clock::now())};
}

std::string UtcTime::to_string() const {
  using namespace std::chrono;
  const auto day_point = floor<days>(value);
  const year_month_day ymd{day_point};
  const hh_mm_ss tod{value - day_point};
  std::string out = fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}", static_cast<int>(ymd.year()),
                                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                                tod.hours().count(), tod.minutes().count(), tod.seconds().count());
  if (const auto ms = tod.subseconds().count(); ms != 0) out += fmt::format(".{:03}", ms);
  out += 'Z';
  return out;
}

// ---------------------------------------------------------------------------
// QuizItem helpers

QuizItem QuizItem::mcq(std::string item_id, std::string stem, std::vector<std::string> option_texts,
                       char correct_label) {
  QuizItem item;
  item.item_id = std::move(item_id);
  item.kind = QuizKind::Mcq;
  item.stem = std::move(stem);
  char label = 'A';
  for (auto& t : option_texts) item.options.push_back({label++, std::move(t)});
  item.correct_label = correct_label;
  return item;
}

QuizItem QuizItem::saq(std::string item_id, std::string stem, std::string answer) {
  QuizItem item;
  item.item_id = std::move(item_id);
  item.kind = QuizKind::Saq;
  item.stem = std::move(stem);
  item.answer_text = std::move(answer);
  return item;
}

const Option* QuizItem::correct_option() const {
  if (kind != QuizKind::Mcq || !correct_label) return nullptr;
  for (const auto& o : options) {
    if (o.label == *correct_label) return &o;
  }
  return nullptr;
}

std::string make_item_id(std::string_view doc_id, std::size_t index) {
  return fmt::format("{}#{}", doc_id, index);
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate(const QuizItem& item, const std::string& path) {
  std::vector<Violation> out;
  if (text::is_blank(item.item_id)) out.push_back({join_path(path, "item_id"), "must be non-empty"});
  if (text::is_blank(item.stem)) out.push_back({join_path(path, "stem"), "must be non-empty"});

  if (item.kind == QuizKind::Mcq) {
    const auto n = static_cast<int>(item.options.size());
    if (n < kMinOptions || n > kMaxOptions) {
      out.push_back({join_path(path, "options"),
                     fmt::format("MCQ needs {}-{} options, got {}", kMinOptions, kMaxOptions, n)});
    }
    std::set<std::string> texts;
    bool duplicate_text = false;
    for (std::size_t i = 0; i < item.options.size(); ++i) {
      const auto& o = item.options[i];
      const char expected = static_cast<char>('A' + i);
      if (o.label != expected) {
        out.push_back({index_path(path, "options", i) + ".label",
                       fmt::format("expected label '{}', got '{}'", expected, o.label)});
      }
      if (text::is_blank(o.text)) {
        out.push_back({index_path(path, "options", i) + ".text", "must be non-empty"});
      } else if (!texts.insert(text::nfc(text::trim(o.text))).second) {
        duplicate_text = true;
      }
    }
    if (duplicate_text) out.push_back({join_path(path, "options"), "option texts must be distinct"});
    if (!item.correct_label) {
      out.push_back({join_path(path, "correct_label"), "required for MCQ"});
    } else if (item.correct_option() == nullptr) {
      out.push_back({join_path(path, "correct_label"),
                     fmt::format("'{}' is not among the option labels", *item.correct_label)});
    }
    if (item.answer_text) out.push_back({join_path(path, "answer_text"), "not allowed for MCQ"});
  } else {
    if (!item.options.empty()) out.push_back({join_path(path, "options"), "not allowed for SAQ"});
    if (item.correct_label) out.push_back({join_path(path, "correct_label"), "not allowed for SAQ"});
    if (!item.answer_text || text::is_blank(*item.answer_text)) {
      out.push_back({join_path(path, "answer_text"), "SAQ needs a non-empty answer"});
    }
  }
  return out;
}

std::vector<Violation> validate(const QuizSet& set, const std::string& path) {
  std::vector<Violation> out;
  if (text::is_blank(set.doc_id)) out.push_back({join_path(path, "doc_id"), "must be non-empty"});
  if (set.items.empty()) out.push_back({join_path(path, "items"), "must be non-empty"});
  std::set<std::string> ids;
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    const auto& item = set.items[i];
    const auto item_path = index_path(path, "items", i);
    if (item.kind != set.format) {
      out.push_back({item_path + ".kind",
                     fmt::format("item kind {} differs from set format {}", to_string(item.kind),
                                 to_string(set.format))});
    }
    if (!item.item_id.empty() && !ids.insert(item.item_id).second) {
      out.push_back({item_path + ".item_id", "duplicate item id"});
    }
    auto nested = validate(item, item_path);
    out.insert(out.end(), nested.begin(), nested.end());
  }
  return out;
}

std::vector<Violation> validate(const SourceDocument& doc, const std::string& path) {
  std::vector<Violation> out;
  if (text::is_blank(doc.id)) out.push_back({join_path(path, "id"), "must be non-empty"});
  if (text::is_blank(doc.body)) out.push_back({join_path(path, "body"), "must be non-empty"});
  if (doc.token_count < 0) out.push_back({join_path(path, "token_count"), "must be non-negative"});
  if (doc.subject.is_other() && text::is_blank(doc.subject.label())) {
    out.push_back({join_path(path, "subject"), "Other subject requires a non-empty label"});
  }
  return out;
}

std::vector<Violation> validate(const Annotation& a, const std::string& path) {
  std::vector<Violation> out;
  if (text::is_blank(a.item_id)) out.push_back({join_path(path, "item_id"), "must be non-empty"});
  if (text::is_blank(a.annotator_id)) {
    out.push_back({join_path(path, "annotator_id"), "must be non-empty"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::string canon(std::string_view s) { return text::sanitize(s); }

/// Collects violations while reading fields out of a JSON object.
class Reader {
 public:
  Reader(const Json& j, std::string path, std::vector<Violation>& sink)
      : j_(j), path_(std::move(path)), sink_(sink) {
    if (!j_.is_object()) fail("", "expected a JSON object");
  }

  bool ok_object() const { return j_.is_object(); }

  void fail(std::string_view field, std::string message) {
    sink_.push_back({field.empty() ? (path_.empty() ? "$" : path_) : join_path(path_, field),
                     std::move(message)});
  }

  const Json* find(std::string_view key) const {
    if (!j_.is_object()) return nullptr;
    auto it = j_.find(std::string(key));
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string required_string(std::string_view key) {
    const Json* v = find(key);
    if (!v) {
      if (j_.is_object()) fail(key, "missing");
      return {};
    }
    if (!v->is_string()) {
      fail(key, "expected a string");
      return {};
    }
    return canon(v->get_ref<const std::string&>());
  }

  std::optional<std::string> optional_string(std::string_view key) {
    const Json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(key, "expected a string");
      return std::nullopt;
    }
    return canon(v->get_ref<const std::string&>());
  }

  std::optional<std::int64_t> optional_int(std::string_view key) {
    const Json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      fail(key, "expected an integer");
      return std::nullopt;
    }
    return v->get<std::int64_t>();
  }

  std::int64_t required_int(std::string_view key) {
    const Json* v = find(key);
    if (!v) {
      if (j_.is_object()) fail(key, "missing");
      return 0;
    }
    if (!v->is_number_integer()) {
      fail(key, "expected an integer");
      return 0;
    }
    return v->get<std::int64_t>();
  }

  const std::string& path() const { return path_; }

 private:
  const Json& j_;
  std::string path_;
  std::vector<Violation>& sink_;
};

QuizKind read_kind(Reader& r, std::string_view key) {
  const std::string s = r.required_string(key);
  if (s == "mcq") return QuizKind::Mcq;
  if (s == "saq") return QuizKind::Saq;
  if (!s.empty()) r.fail(key, fmt::format("unknown kind '{}'", s));
  return QuizKind::Mcq;
}

QuizItem read_item(const Json& j, const std::string& path, std::vector<Violation>& sink) {
  Reader r(j, path, sink);
  QuizItem item;
  if (!r.ok_object()) return item;
  item.item_id = r.required_string("item_id");
  item.kind = read_kind(r, "kind");
  item.stem = r.required_string("stem");
  if (const Json* opts = r.find("options")) {
    if (!opts->is_array()) {
      r.fail("options", "expected an array");
    } else {
      for (std::size_t i = 0; i < opts->size(); ++i) {
        Reader o((*opts)[i], index_path(path, "options", i), sink);
        if (!o.ok_object()) continue;
        Option opt;
        const std::string label = o.required_string("label");
        if (label.size() == 1 && label[0] >= 'A' && label[0] <= 'Z') {
          opt.label = label[0];
        } else {
          if (!label.empty()) o.fail("label", fmt::format("invalid label '{}'", label));
          opt.label = '?';
        }
        opt.text = o.required_string("text");
        item.options.push_back(std::move(opt));
      }
    }
  }
  if (auto label = r.optional_string("correct_label")) {
    if (label->size() == 1 && (*label)[0] >= 'A' && (*label)[0] <= 'Z') {
      item.correct_label = (*label)[0];
    } else {
      r.fail("correct_label", fmt::format("invalid label '{}'", *label));
    }
  }
  item.answer_text = r.optional_string("answer_text");
  auto violations = validate(item, path);
  // Label problems were already reported with a more precise message.
  for (auto& v : violations) {
    const bool dup = std::any_of(sink.begin(), sink.end(),
                                 [&](const Violation& s) { return s.path == v.path; });
    if (!dup) sink.push_back(std::move(v));
  }
  return item;
}

Provenance read_provenance(const Json& j, const std::string& path, std::vector<Violation>& sink) {
  Provenance p;
  Reader r(j, path, sink);
  if (!r.ok_object()) return p;
  p.model = r.optional_string("model").value_or("");
  if (const Json* t = r.find("temperature")) {
    if (t->is_number()) {
      p.temperature = t->get<double>();
    } else {
      r.fail("temperature", "expected a number");
    }
  }
  p.generated_at = r.optional_string("generated_at").value_or("");
  if (const Json* notes = r.find("notes")) {
    if (!notes->is_array()) {
      r.fail("notes", "expected an array");
    } else {
      for (std::size_t i = 0; i < notes->size(); ++i) {
        if ((*notes)[i].is_string()) {
          p.notes.push_back(canon((*notes)[i].get_ref<const std::string&>()));
        } else {
          sink.push_back({index_path(path, "notes", i), "expected a string"});
        }
      }
    }
  }
  return p;
}

template <class T>
T checked(std::vector<Violation>& sink, T value) {
  if (!sink.empty()) throw ValidationError(std::move(sink));
  return value;
}

}  // namespace

Json to_json(const Subject& s) { return s.slug(); }

Json to_json(const QuizItem& item) {
  Json j;
  j["item_id"] = canon(item.item_id);
  j["kind"] = to_string(item.kind);
  j["stem"] = canon(item.stem);
  if (item.kind == QuizKind::Mcq) {
    Json opts = Json::array();
    for (const auto& o : item.options) {
      opts.push_back({{"label", std::string(1, o.label)}, {"text", canon(o.text)}});
    }
    j["options"] = std::move(opts);
    if (item.correct_label) j["correct_label"] = std::string(1, *item.correct_label);
  }
  if (item.answer_text) j["answer_text"] = canon(*item.answer_text);
  return j;
}

Json to_json(const Provenance& p) {
  Json j;
  j["model"] = canon(p.model);
  j["temperature"] = p.temperature;
  j["generated_at"] = canon(p.generated_at);
  Json notes = Json::array();
  for (const auto& n : p.notes) notes.push_back(canon(n));
  j["notes"] = std::move(notes);
  return j;
}

Json to_json(const QuizSet& set) {
  Json j;
  j["doc_id"] = canon(set.doc_id);
  j["format"] = to_string(set.format);
  Json items = Json::array();
  for (const auto& item : set.items) items.push_back(to_json(item));
  j["items"] = std::move(items);
  j["provenance"] = to_json(set.provenance);
  return j;
}

Json to_json(const SourceDocument& doc) {
  Json j;
  j["id"] = canon(doc.id);
  j["subject"] = to_json(doc.subject);
  j["title"] = canon(doc.title);
  j["body"] = canon(doc.body);
  if (doc.source_url) j["source_url"] = canon(*doc.source_url);
  j["token_count"] = doc.token_count;
  return j;
}

Json to_json(const Annotation& a) {
  Json j;
  j["item_id"] = canon(a.item_id);
  j["annotator_id"] = canon(a.annotator_id);
  j["rating"] = std::string(1, to_char(a.rating));
  j["timestamp"] = a.timestamp.to_string();
  if (a.comment) j["comment"] = canon(*a.comment);
  return j;
}

template <>
QuizItem from_json<QuizItem>(const Json& j) {
  std::vector<Violation> sink;
  QuizItem item = read_item(j, "", sink);
  return checked(sink, std::move(item));
}

template <>
QuizSet from_json<QuizSet>(const Json& j) {
  std::vector<Violation> sink;
  QuizSet set;
  Reader r(j, "", sink);
  if (r.ok_object()) {
    set.doc_id = r.required_string("doc_id");
    set.format = read_kind(r, "format");
    if (const Json* items = r.find("items")) {
      if (!items->is_array()) {
        r.fail("items", "expected an array");
      } else {
        for (std::size_t i = 0; i < items->size(); ++i) {
          set.items.push_back(read_item((*items)[i], index_path("", "items", i), sink));
        }
      }
    }
    if (const Json* prov = r.find("provenance")) set.provenance = read_provenance(*prov, "provenance", sink);
    for (auto& v : validate(set)) {
      const bool dup = std::any_of(sink.begin(), sink.end(),
                                   [&](const Violation& s) { return s.path == v.path; });
      if (!dup) sink.push_back(std::move(v));
    }
  }
  return checked(sink, std::move(set));
}

template <>
SourceDocument from_json<SourceDocument>(const Json& j) {
  std::vector<Violation> sink;
  SourceDocument doc;
  Reader r(j, "", sink);
  if (r.ok_object()) {
    doc.id = r.required_string("id");
    const std::string subject = r.required_string("subject");
    if (!subject.empty()) {
      try {
        doc.subject = Subject::from_slug(subject);
      } catch (const ValidationError& e) {
        r.fail("subject", e.violations().front().message);
      }
    }
    doc.title = r.optional_string("title").value_or("");
    doc.body = r.required_string("body");
    doc.source_url = r.optional_string("source_url");
    doc.token_count = r.required_int("token_count");
    for (auto& v : validate(doc)) {
      const bool dup = std::any_of(sink.begin(), sink.end(),
                                   [&](const Violation& s) { return s.path == v.path; });
      if (!dup) sink.push_back(std::move(v));
    }
  }
  return checked(sink, std::move(doc));
}

template <>
Annotation from_json<Annotation>(const Json& j) {
  std::vector<Violation> sink;
  Annotation a;
  Reader r(j, "", sink);
  if (r.ok_object()) {
    a.item_id = r.required_string("item_id");
    a.annotator_id = r.required_string("annotator_id");
    const std::string rating = r.required_string("rating");
    if (auto parsed = parse_rating(rating)) {
      a.rating = *parsed;
    } else if (!rating.empty() || r.find("rating")) {
      r.fail("rating", fmt::format("'{}' is not one of A, B, C, D, E", rating));
    }
    const std::string ts = r.required_string("timestamp");
    if (auto parsed = UtcTime::parse(ts)) {
      a.timestamp = *parsed;
    } else if (!ts.empty()) {
      r.fail("timestamp", fmt::format("'{}' is not an ISO-8601 UTC instant", ts));
    }
    a.comment = r.optional_string("comment");
    for (auto& v : validate(a)) {
      const bool dup = std::any_of(sink.begin(), sink.end(),
                                   [&](const Violation& s) { return s.path == v.path; });
      if (!dup) sink.push_back(std::move(v));
    }
  }
  return checked(sink, std::move(a));
}

namespace {

Json parse_or_throw(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ValidationError("$", fmt::format("invalid JSON at byte {}: {}", e.byte, e.what()));
  }
}

}  // namespace

template <>
QuizItem deserialize<QuizItem>(std::string_view text) {
  return from_json<QuizItem>(parse_or_throw(text));
}
template <>
QuizSet deserialize<QuizSet>(std::string_view text) {
  return from_json<QuizSet>(parse_or_throw(text));
}
template <>
SourceDocument deserialize<SourceDocument>(std::string_view text) {
  return from_json<SourceDocument>(parse_or_throw(text));
}
template <>
Annotation deserialize<Annotation>(std::string_view text) {
  return from_json<Annotation>(parse_or_throw(text));
}

}  // namespace quizforge
