#include "quizforge/corpus.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <map>
#include <set>

#include "quizforge/io.hpp"
#include "quizforge/stats.hpp"
#include "quizforge/text.hpp"

namespace quizforge::corpus {

namespace fs = std::filesystem;

std::string_view to_string(TokenizerKind kind) {
  return kind == TokenizerKind::UnicodeWords ? "unicode-words" : "whitespace";
}

TokenizerKind parse_tokenizer_kind(std::string_view s) {
  if (s == "unicode-words" || s == "words") return TokenizerKind::UnicodeWords;
  if (s == "whitespace") return TokenizerKind::WhitespaceSplit;
  throw ValidationError("tokenizer", fmt::format("unknown tokenizer '{}'", s));
}

std::string_view to_string(RejectReason reason) {
  return reason == RejectReason::TooShort ? "too_short" : "too_long";
}

void FilterConfig::validate() const {
  std::vector<Violation> v;
  if (min_tokens <= 0) v.push_back({"min_tokens", "must be positive"});
  if (max_tokens <= 0) v.push_back({"max_tokens", "must be positive"});
  if (min_tokens >= max_tokens) v.push_back({"min_tokens", "must be smaller than max_tokens"});
  if (!v.empty()) throw ValidationError(std::move(v));
}

// ---------------------------------------------------------------------------
// Cleaning

namespace {

struct Entity {
  std::string_view name;
  char32_t cp;
};

constexpr std::array<Entity, 30> kEntities = {{
    {"amp", U'&'},       {"lt", U'<'},         {"gt", U'>'},         {"quot", U'"'},
    {"apos", U'\''},     {"nbsp", U' '},  {"ccedil", U'ç'},     {"Ccedil", U'Ç'},
    {"ouml", U'ö'},      {"Ouml", U'Ö'},       {"uuml", U'ü'},       {"Uuml", U'Ü'},
    {"hellip", U'…'},    {"ndash", U'–'},      {"mdash", U'—'},      {"lsquo", U'‘'},
    {"rsquo", U'’'},     {"ldquo", U'“'},      {"rdquo", U'”'},      {"laquo", U'«'},
    {"raquo", U'»'},     {"deg", U'°'},        {"middot", U'·'},     {"copy", U'©'},
    {"reg", U'®'},       {"acirc", U'â'},      {"Acirc", U'Â'},      {"icirc", U'î'},
    {"ucirc", U'û'},     {"times", U'×'},
}};

bool ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool ascii_alnum(char c) { return ascii_alpha(c) || (c >= '0' && c <= '9'); }

/// Decodes known entities and removes any other entity-shaped sequence.
std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 33 || semi == i + 1) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string_view body = s.substr(i + 1, semi - i - 1);
    if (body[0] == '#') {
      const bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
      const std::string_view digits = body.substr(hex ? 2 : 1);
      bool ok = !digits.empty() && digits.size() <= 8;
      char32_t cp = 0;
      for (char c : digits) {
        int d = -1;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (hex && c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') d = c - 'A' + 10;
        if (d < 0) {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<char32_t>(d);
      }
      if (!ok) {
        out.push_back(s[i++]);
        continue;
      }
      if (cp != 0 && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF)) text::append_utf8(out, cp);
      i = semi + 1;
      continue;
    }
    if (!std::all_of(body.begin(), body.end(), ascii_alnum) || !ascii_alpha(body[0])) {
      out.push_back(s[i++]);
      continue;
    }
    for (const auto& e : kEntities) {
      if (e.name == body) {
        text::append_utf8(out, e.cp);
        break;
      }
    }
    i = semi + 1;  // unknown named entities are dropped
  }
  return out;
}

/// Replaces tags with a space; drops script/style/comment content entirely.
std::string strip_tags(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '<' || i + 1 >= s.size()) {
      out.push_back(s[i++]);
      continue;
    }
    const char next = s[i + 1];
    if (s.substr(i, 4) == "<!--") {
      const auto end = s.find("-->", i + 4);
      i = end == std::string_view::npos ? s.size() : end + 3;
      out.push_back(' ');
      continue;
    }
    if (!(ascii_alpha(next) || next == '/' || next == '!' || next == '?')) {
      out.push_back(s[i++]);
      continue;
    }
    const auto close = s.find('>', i + 1);
    if (close == std::string_view::npos) {
      out.push_back(s[i++]);
      continue;
    }
    // Element name, for script/style bodies.
    std::size_t name_start = i + 1;
    std::size_t name_end = name_start;
    while (name_end < close && ascii_alnum(s[name_end])) ++name_end;
    std::string name(s.substr(name_start, name_end - name_start));
    std::transform(name.begin(), name.end(), name.begin(),
                   [](char c) { return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c); });
    i = close + 1;
    if (name == "script" || name == "style") {
      const std::string end_tag = "</" + name;
      std::size_t j = i;
      while (j < s.size()) {
        const auto found = s.find("</", j);
        if (found == std::string_view::npos) {
          j = s.size();
          break;
        }
        if (text::starts_with_icase(s.substr(found), end_tag)) {
          const auto gt = s.find('>', found);
          j = gt == std::string_view::npos ? s.size() : gt + 1;
          break;
        }
        j = found + 2;
      }
      i = j;
    }
    out.push_back(' ');
  }
  return out;
}

bool url_terminator(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || c == '<' ||
         c == '"' || c == '\'';
}

std::string strip_urls(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const bool boundary = i == 0 || (!ascii_alnum(s[i - 1]) && static_cast<unsigned char>(s[i - 1]) < 0x80);
    if (boundary && (text::starts_with_icase(s.substr(i), "http://") ||
                     text::starts_with_icase(s.substr(i), "https://") ||
                     text::starts_with_icase(s.substr(i), "www."))) {
      while (i < s.size() && !url_terminator(s[i])) ++i;
      continue;
    }
    out.push_back(s[i++]);
  }
  return out;
}

/// Drops emoji and control characters, maps other whitespace to ' ' or '\n'.
std::string strip_codepoints(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : text::decode_utf8(s)) {
    if (cp == U'\n' || cp == 0x2028 || cp == 0x2029 || cp == 0x0B || cp == 0x0C || cp == 0x85) {
      out.push_back('\n');
    } else if (cp == U'\r') {
      continue;
    } else if (text::is_space(cp)) {
      out.push_back(' ');
    } else if (text::is_emoji(cp) || text::is_control(cp) || cp == 0xFFFD || cp == 0xFEFF) {
      continue;
    } else {
      text::append_utf8(out, cp);
    }
  }
  return out;
}

std::string collapse_spaces(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  bool pending = false;
  for (char c : line) {
    if (c == ' ' || c == '\t') {
      pending = !out.empty();
    } else {
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
  }
  return out;
}

std::string clean_once(std::string_view raw, const CleanOptions& options) {
  std::string s = text::nfc(text::encode_utf8(text::decode_utf8(raw)));
  s = decode_entities(s);
  s = strip_tags(s);
  s = strip_urls(s);
  s = strip_codepoints(s);
  s = text::nfc(s);

  std::vector<std::string> lines;
  for (auto line : text::split_lines(s)) {
    std::string collapsed = collapse_spaces(line);
    if (!collapsed.empty()) lines.push_back(std::move(collapsed));
  }
  if (lines.size() > 1) {
    std::erase_if(lines, [&](const std::string& l) {
      return text::count_word_tokens(l) < static_cast<std::size_t>(std::max(0, options.fragment_min_tokens));
    });
  }
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

}  // namespace

std::string clean(std::string_view raw, const CleanOptions& options) {
  std::string current = clean_once(raw, options);
  // Each pass only shrinks the text, so this settles within a few rounds;
  // iterating to the fixpoint is what makes clean idempotent.
  for (int round = 0; round < 16; ++round) {
    std::string next = clean_once(current, options);
    if (next == current) break;
    current = std::move(next);
  }
  if (text::count_word_tokens(current) == 0) throw EmptyAfterCleaning();
  return current;
}

std::size_t token_count(std::string_view s, TokenizerKind tokenizer) {
  if (tokenizer == TokenizerKind::UnicodeWords) return text::count_word_tokens(s);
  return text::whitespace_tokens(s).size();
}

// ---------------------------------------------------------------------------
// Filtering and statistics

FilterResult filter_docs(std::span<const SourceDocument> docs, const FilterConfig& cfg) {
  cfg.validate();
  FilterResult result;
  for (const auto& doc : docs) {
    if (doc.token_count < cfg.min_tokens) {
      result.rejected.push_back({doc.id, RejectReason::TooShort, doc.token_count});
    } else if (doc.token_count > cfg.max_tokens) {
      result.rejected.push_back({doc.id, RejectReason::TooLong, doc.token_count});
    } else {
      result.kept.push_back(doc);
    }
  }
  return result;
}

std::vector<SubjectShare> subject_distribution(std::span<const SourceDocument> docs) {
  std::map<Subject, std::size_t> counts;
  for (const auto& doc : docs) ++counts[doc.subject];
  std::vector<SubjectShare> shares;
  for (const auto& [subject, count] : counts) shares.push_back({subject, count, 0.0});
  std::stable_sort(shares.begin(), shares.end(), [](const SubjectShare& a, const SubjectShare& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.subject.slug() < b.subject.slug();
  });
  std::vector<std::size_t> raw;
  for (const auto& s : shares) raw.push_back(s.count);
  const auto pct = stats::rounded_percentages(raw, 1);
  for (std::size_t i = 0; i < shares.size(); ++i) shares[i].percentage = pct[i];
  return shares;
}

std::vector<TokenBucket> token_histogram(std::span<const SourceDocument> docs, std::int64_t bucket_width,
                                         std::int64_t min_upper) {
  if (bucket_width <= 0) throw ValidationError("bucket_width", "must be positive");
  std::int64_t max_count = -1;
  for (const auto& d : docs) max_count = std::max(max_count, d.token_count);
  const std::int64_t upper = std::max(min_upper, max_count + 1);
  const std::int64_t n_buckets = upper <= 0 ? 0 : (upper + bucket_width - 1) / bucket_width;
  std::vector<TokenBucket> buckets;
  buckets.reserve(static_cast<std::size_t>(n_buckets));
  for (std::int64_t b = 0; b < n_buckets; ++b) {
    buckets.push_back({b * bucket_width, (b + 1) * bucket_width, 0});
  }
  for (const auto& d : docs) {
    const auto idx = static_cast<std::size_t>(std::max<std::int64_t>(0, d.token_count) / bucket_width);
    ++buckets[idx].count;
  }
  return buckets;
}

// ---------------------------------------------------------------------------
// Ingestion

RawRecord raw_record_from_json(const Json& j) {
  std::vector<Violation> v;
  RawRecord r;
  if (!j.is_object()) throw ValidationError("$", "expected a JSON object");
  auto str = [&](const char* key) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) {
      v.push_back({key, "expected a string"});
      return std::nullopt;
    }
    return it->get<std::string>();
  };
  r.source_url = str("source_url").value_or("");
  r.subject_hint = str("subject_hint");
  if (!r.subject_hint) r.subject_hint = str("subject");
  r.raw_text = str("raw_text").value_or("");
  if (r.raw_text.empty()) {
    if (auto t = str("text")) r.raw_text = *t;
  }
  r.title = str("title");
  r.id = str("id");
  if (text::is_blank(r.raw_text)) v.push_back({"raw_text", "must be non-empty"});
  if (!v.empty()) throw ValidationError(std::move(v));
  return r;
}

namespace {

void read_json_file(const fs::path& path, std::vector<RawRecord>& out) {
  const std::string content = io::read_file(path);
  Json j;
  try {
    j = Json::parse(content);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string(), fmt::format("invalid JSON at byte {}", e.byte));
  }
  if (j.is_array()) {
    for (const auto& el : j) out.push_back(raw_record_from_json(el));
  } else {
    out.push_back(raw_record_from_json(j));
  }
}

void read_jsonl_file(const fs::path& path, std::vector<RawRecord>& out) {
  std::vector<Violation> problems;
  for (const auto& line : io::read_jsonl_lines(path)) {
    try {
      out.push_back(raw_record_from_json(Json::parse(line.text)));
    } catch (const Json::parse_error& e) {
      problems.push_back({fmt::format("{}:{}", path.string(), line.line_no),
                          fmt::format("invalid JSON at byte {}", e.byte)});
    } catch (const ValidationError& e) {
      for (const auto& viol : e.violations()) {
        problems.push_back({fmt::format("{}:{}: {}", path.string(), line.line_no, viol.path), viol.message});
      }
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

}  // namespace

std::vector<RawRecord> read_raw_records(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw IoError(path, "does not exist");
  std::vector<RawRecord> out;
  if (!fs::is_directory(path, ec)) {
    if (path.extension() == ".json") {
      read_json_file(path, out);
    } else {
      read_jsonl_file(path, out);
    }
    return out;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(path, ec)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  if (ec) throw IoError(path, "cannot list directory");
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto ext = f.extension();
    if (ext == ".jsonl") {
      read_jsonl_file(f, out);
    } else if (ext == ".json") {
      read_json_file(f, out);
    } else if (ext == ".txt") {
      RawRecord r;
      r.raw_text = io::read_file(f);
      r.source_url = "file://" + fs::relative(f, path).generic_string();
      if (f.parent_path() != path) r.subject_hint = f.parent_path().filename().string();
      if (!text::is_blank(r.raw_text)) out.push_back(std::move(r));
    }
  }
  return out;
}

namespace {

std::string derive_title(const std::string& body) {
  const auto first_line = text::split_lines(body).front();
  constexpr std::size_t kMax = 80;
  if (first_line.size() <= kMax) return std::string(first_line);
  // Cut on a word boundary, keeping valid UTF-8.
  auto cut = first_line.substr(0, kMax).rfind(' ');
  if (cut == std::string_view::npos || cut == 0) cut = kMax;
  while (cut > 0 && (static_cast<unsigned char>(first_line[cut]) & 0xC0) == 0x80) --cut;
  return std::string(first_line.substr(0, cut)) + "…";
}

}  // namespace

IngestResult ingest(std::span<const RawRecord> records, const CleanOptions& clean_options,
                    TokenizerKind tokenizer) {
  IngestResult result;
  std::set<std::string> used;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string source = r.source_url.empty() ? fmt::format("record {}", i + 1) : r.source_url;
    std::string body;
    try {
      body = clean(r.raw_text, clean_options);
    } catch (const EmptyAfterCleaning&) {
      result.failures.push_back({source, "empty after cleaning"});
      continue;
    }
    SourceDocument doc;
    std::string id = r.id && !text::is_blank(*r.id)
                         ? text::sanitize(text::trim(*r.id))
                         : "doc-" + io::sha256_hex(r.source_url + "\n" + body).substr(0, 12);
    if (used.count(id)) {
      int suffix = 2;
      while (used.count(fmt::format("{}-{}", id, suffix))) ++suffix;
      id = fmt::format("{}-{}", id, suffix);
    }
    used.insert(id);
    doc.id = std::move(id);
    doc.subject = r.subject_hint ? Subject::from_hint(*r.subject_hint) : Subject{};
    doc.title = r.title && !text::is_blank(*r.title) ? text::sanitize(text::trim(*r.title)) : derive_title(body);
    doc.token_count = static_cast<std::int64_t>(token_count(body, tokenizer));
    doc.body = std::move(body);
    if (!r.source_url.empty()) doc.source_url = text::sanitize(r.source_url);
    result.docs.push_back(std::move(doc));
  }
  return result;
}

}  // namespace quizforge::corpus
