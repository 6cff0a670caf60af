#include <doctest.h>

#include <algorithm>
#include <random>

#include "quizforge/model.hpp"
#include "support.hpp"

using namespace quizforge;

TEST_CASE("subject hints map to named subjects") {
  CHECK(Subject::from_hint("Tarih").kind() == SubjectKind::History);
  CHECK(Subject::from_hint("HISTORY").kind() == SubjectKind::History);
  CHECK(Subject::from_hint("KİMYA").kind() == SubjectKind::Chemistry);
  CHECK(Subject::from_hint("Türk Edebiyatı").kind() == SubjectKind::TurkishLiterature);
  CHECK(Subject::from_hint("turk_edebiyati").kind() == SubjectKind::TurkishLiterature);
  CHECK(Subject::from_hint("coğrafya").kind() == SubjectKind::Geography);
  const auto other = Subject::from_hint("Astronomi");
  CHECK(other.is_other());
  CHECK(other.label() == "Astronomi");
  CHECK(other.slug() == "other:Astronomi");
  CHECK(Subject::from_hint("").is_other());
}

TEST_CASE("subject slugs round trip") {
  for (auto kind : named_subjects()) {
    const Subject s(kind);
    CHECK(Subject::from_slug(s.slug()) == s);
    CHECK_FALSE(s.turkish_name().empty());
  }
  CHECK(Subject::from_slug("other:Müzik") == Subject::other("Müzik"));
  CHECK_THROWS_AS(Subject::from_slug("astrology"), ValidationError);
  CHECK_THROWS_AS(Subject::from_slug("other:  "), ValidationError);
}

TEST_CASE("ratings order A highest") {
  CHECK(Rating::A > Rating::B);
  CHECK(Rating::D > Rating::E);
  CHECK(parse_rating("C") == Rating::C);
  CHECK_FALSE(parse_rating("F"));
  CHECK_FALSE(parse_rating("a"));
  CHECK_FALSE(parse_rating("AB"));
  for (auto r : kAllRatings) CHECK(parse_rating(std::string(1, to_char(r))) == r);
}

TEST_CASE("utc timestamps parse and render") {
  const auto t = UtcTime::parse("2024-03-05T07:08:09.120Z");
  REQUIRE(t);
  CHECK(t->to_string() == "2024-03-05T07:08:09.120Z");
  const auto whole = UtcTime::parse("2024-03-05T07:08:09Z");
  REQUIRE(whole);
  CHECK(whole->to_string() == "2024-03-05T07:08:09Z");
  CHECK(*whole < *t);
  CHECK_FALSE(UtcTime::parse("2024-03-05 07:08:09"));
  CHECK_FALSE(UtcTime::parse("yesterday"));
}

TEST_CASE("quiz sets round trip through JSON") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto kind = i % 2 ? QuizKind::Saq : QuizKind::Mcq;
    const auto qs = qf_test::random_quiz_set(rng, kind, "doc-" + std::to_string(i));
    REQUIRE(validate(qs).empty());
    CHECK(deserialize<QuizSet>(serialize(qs)) == qs);
  }
}

TEST_CASE("serialization is canonical") {
  auto item = QuizItem::saq("d#0", "Soru?", "cevap");
  QuizSet qs{"d", QuizKind::Saq, {item}, {}};
  const auto text = serialize(qs);
  CHECK(text.find('\n') == std::string::npos);
  CHECK(text.find("\"doc_id\"") < text.find("\"items\""));
  CHECK(serialize(deserialize<QuizSet>(text)) == text);
}

TEST_CASE("validation reports every problem with a path") {
  QuizItem bad;
  bad.item_id = "x#0";
  bad.kind = QuizKind::Mcq;
  bad.stem = " ";
  bad.options = {{'A', "aynı"}, {'C', "aynı"}};
  bad.correct_label = 'E';
  const auto v = validate(bad, "items[0]");
  std::vector<std::string> paths;
  for (const auto& x : v) paths.push_back(x.path);
  CHECK(std::count(paths.begin(), paths.end(), "items[0].stem") == 1);
  CHECK(std::count(paths.begin(), paths.end(), "items[0].options[1].label") == 1);
  CHECK(std::count(paths.begin(), paths.end(), "items[0].options") == 1);
  CHECK(std::count(paths.begin(), paths.end(), "items[0].correct_label") == 1);

  auto saq = QuizItem::saq("y#0", "Soru?", "");
  CHECK_FALSE(validate(saq).empty());

  QuizSet mixed{"d", QuizKind::Saq, {QuizItem::mcq("d#0", "S?", {"a", "b"}, 'A')}, {}};
  const auto mv = validate(mixed);
  CHECK(std::any_of(mv.begin(), mv.end(), [](const Violation& x) { return x.path == "items[0].kind"; }));
}

TEST_CASE("too many options is rejected") {
  auto item = QuizItem::mcq("d#0", "S?", {"a", "b", "c", "d", "e", "f"}, 'A');
  CHECK_FALSE(validate(item).empty());
}

TEST_CASE("deserialize reports syntax errors at the root") {
  try {
    deserialize<QuizSet>("{not json");
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.has_path("$"));
  }
  CHECK_THROWS_AS(deserialize<QuizSet>(R"({"doc_id":"d","format":"mcq","items":[]})"), ValidationError);
}

TEST_CASE("annotations round trip and validate") {
  Annotation a{"d#0", "ann1", Rating::B, *UtcTime::parse("2024-01-02T03:04:05Z"), "iyi"};
  CHECK(deserialize<Annotation>(serialize(a)) == a);
  CHECK_THROWS_AS(deserialize<Annotation>(R"({"item_id":"d#0","annotator_id":"x","rating":"Z","timestamp":"2024-01-02T03:04:05Z"})"),
                  ValidationError);
}

TEST_CASE("source documents are NFC on output") {
  auto d = qf_test::make_doc("d1", SubjectKind::History, "c\xCC\xA7ok");
  const auto j = to_json(d);
  CHECK(j["body"] == "çok");
}
