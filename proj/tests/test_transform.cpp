#include <doctest.h>

#include <random>

#include "quizforge/io.hpp"
#include "quizforge/transform.hpp"
#include "support.hpp"

using namespace quizforge;
using namespace quizforge::transform;

TEST_CASE("mcq to saq keeps stems, ids and the correct option text") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 200; ++i) {
    const auto mcq = qf_test::random_quiz_set(rng, QuizKind::Mcq, "doc-" + std::to_string(i));
    const auto saq = mcq_to_saq(mcq);
    CHECK(validate(saq).empty());
    CHECK(saq.format == QuizKind::Saq);
    CHECK(saq.doc_id == mcq.doc_id);
    REQUIRE(saq.items.size() == mcq.items.size());
    for (std::size_t k = 0; k < saq.items.size(); ++k) {
      CHECK(saq.items[k].item_id == mcq.items[k].item_id);
      CHECK(saq.items[k].stem == mcq.items[k].stem);
      CHECK(saq.items[k].answer_text == mcq.items[k].correct_option()->text);
      CHECK(saq.items[k].options.empty());
    }
    CHECK(saq.provenance.model == mcq.provenance.model);
    CHECK(saq.provenance.notes.back() == kTransformNote);
  }
}

TEST_CASE("mcq to saq rejects bad input") {
  QuizSet saq{"d", QuizKind::Saq, {QuizItem::saq("d#0", "S?", "c")}, {}};
  CHECK_THROWS_AS(mcq_to_saq(saq), InvalidInput);
  auto broken = QuizItem::mcq("d#0", "S?", {"a", "b"}, 'A');
  broken.correct_label = 'Z';
  CHECK_THROWS_AS(mcq_to_saq(QuizSet{"d", QuizKind::Mcq, {broken}, {}}), Error);
}

TEST_CASE("lint flags stems that presuppose options") {
  QuizSet mcq{"d",
              QuizKind::Mcq,
              {QuizItem::mcq("d#0", "AŞAĞIDAKİLERDEN HANGİSİ bir gazdır?", {"Oksijen", "Demir"}, 'A'),
               QuizItem::mcq("d#1", "Suyun formülü nedir?", {"H2O", "CO2"}, 'A')},
              {}};
  const auto warnings = lint_option_dependent_stems(mcq_to_saq(mcq));
  CHECK(warnings == std::vector<std::string>{"d#0"});
}

TEST_CASE("corpus transform skips bad records and writes the rest") {
  qf_test::TempDir dir;
  QuizSet good{"d1", QuizKind::Mcq, {QuizItem::mcq("d1#0", "Başkent?", {"Ankara", "Bursa"}, 'A')}, {}};
  QuizSet already{"d2", QuizKind::Saq, {QuizItem::saq("d2#0", "S?", "c")}, {}};
  qf_test::spit(dir / "in.jsonl", serialize(good) + "\n{broken\n" + serialize(already) + "\n");
  const auto summary = transform_corpus(dir / "in.jsonl", dir / "out.jsonl");
  CHECK(summary.sets == 1);
  CHECK(summary.items == 1);
  REQUIRE(summary.errors.size() == 2);
  CHECK(summary.errors[0].line == 2);
  CHECK(summary.errors[1].line == 3);
  const auto out = io::read_records<QuizSet>(dir / "out.jsonl");
  REQUIRE(out.size() == 1);
  CHECK(out[0].items[0].answer_text == "Ankara");
  const auto j = to_json(summary);
  CHECK(j["sets"] == 1);
}
