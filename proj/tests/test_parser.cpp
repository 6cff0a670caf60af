#include <doctest.h>

#include <random>

#include "quizforge/quiz_parser.hpp"
#include "support.hpp"

using namespace quizforge;

namespace {

ExpectedShape mcq(int options = 0, std::optional<int> n = std::nullopt) { return {QuizKind::Mcq, options, n}; }
ExpectedShape saq() { return {QuizKind::Saq, 0, std::nullopt}; }

}  // namespace

TEST_CASE("generated sets survive format then parse in both layouts") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    const auto kind = i % 3 == 0 ? QuizKind::Saq : QuizKind::Mcq;
    const auto qs = qf_test::random_quiz_set(rng, kind, "doc-" + std::to_string(i));
    for (auto layout : {QuizLayout::Json, QuizLayout::Lettered}) {
      CAPTURE(format_quiz(qs, layout));
      const auto parsed = parse_quiz(format_quiz(qs, layout), {kind, 0, std::nullopt}, qs.doc_id);
      CHECK(parsed.items == qs.items);
      CHECK(parsed.format == kind);
      CHECK(parsed.doc_id == qs.doc_id);
    }
  }
}

TEST_CASE("json layout with fences and surrounding prose") {
  const std::string raw =
      "İşte sorular:\n```json\n"
      R"([{"question": "Türkiye'nin başkenti neresidir?", "options": {"A": "İstanbul", "B": "Ankara", "C": "İzmir"}, "answer": "B"}])"
      "\n```\nBaşarılar!";
  const auto qs = parse_quiz(raw, mcq(3, 1), "d");
  REQUIRE(qs.items.size() == 1);
  CHECK(qs.items[0].item_id == "d#0");
  CHECK(qs.items[0].stem == "Türkiye'nin başkenti neresidir?");
  REQUIRE(qs.items[0].correct_option());
  CHECK(qs.items[0].correct_option()->text == "Ankara");
}

TEST_CASE("json option arrays and short answers") {
  const auto m = parse_quiz(R"([{"question":"S?","options":["a","b"],"answer":"A"}])", mcq(), "d");
  CHECK(m.items[0].options.size() == 2);
  const auto s = parse_quiz(R"([{"question":"Başkent?","answer":"Ankara"}])", saq(), "d");
  CHECK(s.items[0].answer_text == "Ankara");
}

TEST_CASE("lettered layout accepts the long answer prefix") {
  const std::string raw =
      "1. Fotosentez hangi organelde gerçekleşir?\n"
      "A) Mitokondri\n"
      "B) Kloroplast\n"
      "C) Ribozom\n"
      "Doğru Cevap: B\n"
      "\n"
      "2. Hücrenin enerji santrali hangisidir?\n"
      "A) Mitokondri\n"
      "B) Lizozom\n"
      "C) Koful\n"
      "Cevap: A\n";
  const auto qs = parse_quiz(raw, mcq(3, 2), "bio");
  REQUIRE(qs.items.size() == 2);
  CHECK(qs.items[0].correct_label == 'B');
  CHECK(qs.items[1].item_id == "bio#1");
  CHECK(qs.items[1].correct_option()->text == "Mitokondri");
}

TEST_CASE("lettered short answers") {
  const auto qs = parse_quiz("1. Malazgirt Savaşı hangi yılda yapıldı?\nCevap: 1071\n", saq(), "t");
  REQUIRE(qs.items.size() == 1);
  CHECK(qs.items[0].answer_text == "1071");
}

TEST_CASE("malformed replies raise parse errors") {
  CHECK_THROWS_AS(parse_quiz("Üzgünüm, bu metinden soru üretemiyorum.", mcq(), "d"), ParseError);
  CHECK_THROWS_AS(parse_quiz("", mcq(), "d"), ParseError);
  CHECK_THROWS_AS(parse_quiz(R"([{"question":"S?","options":{"A":"a","B":"b"}}])", mcq(), "d"), ParseError);
  CHECK_THROWS_AS(parse_quiz(R"([{"question":"S?","options":{"A":"a","B":"b"},"answer":"D"}])", mcq(), "d"),
                  ParseError);
  CHECK_THROWS_AS(parse_quiz("1. S?\nA) a\nC) b\nCevap: A\n", mcq(), "d"), ParseError);
  CHECK_THROWS_AS(parse_quiz("1. S?\nA) a\nB) b\nCevap: A\nCevap: B\n", mcq(), "d"), ParseError);
  CHECK_THROWS_AS(parse_quiz("1. S?\nA) a\nB) a\nCevap: A\n", mcq(), "d"), ParseError);
}

TEST_CASE("shape expectations are enforced") {
  const std::string two = R"([{"question":"S?","options":{"A":"a","B":"b"},"answer":"A"}])";
  CHECK_NOTHROW(parse_quiz(two, mcq(2, 1), "d"));
  CHECK_THROWS_AS(parse_quiz(two, mcq(4), "d"), ParseError);
  CHECK_THROWS_AS(parse_quiz(two, mcq(0, 3), "d"), ParseError);
  try {
    parse_quiz(two, mcq(4), "d");
  } catch (const ParseError& e) {
    CHECK(e.reason().find("count mismatch") != std::string::npos);
  }
}

TEST_CASE("parse error offsets point into the reply") {
  const std::string raw = "Sorular:\n[{\"question\": \"S?\", \"answer\": }]";
  try {
    parse_quiz(raw, saq(), "d");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() >= raw.find('['));
    CHECK(e.offset() < raw.size());
  }
}
