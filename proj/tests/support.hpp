#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "quizforge/model.hpp"

namespace qf_test {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& name) { return fs::path(QF_FIXTURE_DIR) / name; }

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    for (;;) {
      path_ = fs::temp_directory_path() / ("qf-test-" + std::to_string(rd()));
      if (fs::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    fs::permissions(path_, fs::perms::owner_all, fs::perm_options::add, ec);
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

// Vocabulary for generated quiz text. Some entries look like layout markers
// on purpose; they never start a line.
inline const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = {
      "Osmanlı",  "İstanbul", "ırmak",   "şehir",    "ğ",       "çağ",       "öğrenci", "üzüm",
      "Işık",     "kimya",    "atom",    "hücre",    "1923'te", "%40",       "(bkz.",   "A)",
      "Cevap:",   "2.",       "\"söz\"", "{süslü}",  "[köşeli]", "ve",       "ile",     "hangisidir",
      "TÜRKİYE",  "yıl",      "enerji",  "fotosentez", "dağ",   "nehir",     "—tire",   "emoji🙂",
      "Ağrı",     "felsefe",  "Mevlânâ", "x²",       "C:",      "doğru",     "yanlış",  "bilgi"};
  return words;
}

inline std::string random_phrase(std::mt19937_64& rng, int min_words, int max_words) {
  const auto& v = vocabulary();
  std::uniform_int_distribution<int> len(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
  const int n = len(rng);
  std::string out;
  for (int i = 0; i < n; ++i) {
    std::string w = v[pick(rng)];
    // Lead with a plain word so generated lines never begin with a marker.
    if (i == 0) w = "Soru" + std::to_string(pick(rng));
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

inline quizforge::QuizSet random_quiz_set(std::mt19937_64& rng, quizforge::QuizKind format,
                                          const std::string& doc_id) {
  using namespace quizforge;
  QuizSet qs;
  qs.doc_id = doc_id;
  qs.format = format;
  qs.provenance.model = "gen";
  qs.provenance.generated_at = "2024-01-01T00:00:00Z";
  std::uniform_int_distribution<int> items(1, 6);
  std::uniform_int_distribution<int> opts(kMinOptions, kMaxOptions);
  const int n = items(rng);
  for (int i = 0; i < n; ++i) {
    const auto id = make_item_id(doc_id, static_cast<std::size_t>(i));
    const auto stem = random_phrase(rng, 2, 10) + "?";
    if (format == QuizKind::Mcq) {
      const int k = opts(rng);
      std::vector<std::string> texts;
      for (int o = 0; o < k; ++o) texts.push_back(random_phrase(rng, 1, 4) + " #" + std::to_string(o));
      const char correct = static_cast<char>('A' + std::uniform_int_distribution<int>(0, k - 1)(rng));
      qs.items.push_back(QuizItem::mcq(id, stem, texts, correct));
    } else {
      qs.items.push_back(QuizItem::saq(id, stem, random_phrase(rng, 1, 5)));
    }
  }
  return qs;
}

inline quizforge::SourceDocument make_doc(const std::string& id, quizforge::SubjectKind subject,
                                          const std::string& body, const std::string& title = "Başlık") {
  quizforge::SourceDocument d;
  d.id = id;
  d.subject = quizforge::Subject(subject);
  d.title = title;
  d.body = body;
  d.token_count = 1;
  return d;
}

}  // namespace qf_test
