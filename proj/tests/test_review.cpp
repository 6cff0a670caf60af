#include <doctest.h>

#include <httplib.h>

#include "quizforge/review.hpp"
#include "support.hpp"

using namespace quizforge;
using namespace quizforge::review;

namespace {

struct Fixture {
  std::vector<SourceDocument> docs;
  std::vector<QuizSet> sets;

  Fixture() {
    const std::array<SubjectKind, 4> subjects = {SubjectKind::History, SubjectKind::Biology, SubjectKind::Philosophy,
                                                 SubjectKind::TurkishLiterature};
    for (int d = 0; d < 4; ++d) {
      const auto id = "doc" + std::to_string(d);
      docs.push_back(qf_test::make_doc(id, subjects[static_cast<std::size_t>(d)], "Metin " + std::to_string(d),
                                       "Başlık " + std::to_string(d)));
      QuizSet qs{id, QuizKind::Mcq, {}, {}};
      for (int i = 0; i < 5; ++i) {
        qs.items.push_back(QuizItem::mcq(make_item_id(id, i), "Soru " + std::to_string(i) + "?",
                                         {"birinci", "ikinci", "üçüncü"}, 'B'));
      }
      sets.push_back(qs);
    }
  }
};

Json body_of(const httplib::Result& res) {
  REQUIRE(res);
  return Json::parse(res->body);
}

std::string rating_body(const std::string& item, const std::string& who, const std::string& r) {
  return Json{{"item_id", item}, {"annotator_id", who}, {"rating", r}}.dump();
}

}  // namespace

TEST_CASE("api serves items in index order per annotator") {
  qf_test::TempDir dir;
  Fixture f;
  ReviewApi api(f.sets, f.docs, dir / "store.jsonl");
  CHECK(api.item_count() == 20);
  auto first = api.next_item("ayse");
  CHECK(first.status == 200);
  CHECK(first.body["item"]["index"] == 0);
  CHECK(first.body["item"]["item_id"] == "doc0#0");
  CHECK(first.body["item"]["context"]["subject"] == "history");
  CHECK(first.body["item"]["answer"]["label"] == "B");
  CHECK(first.body["item"]["answer"]["text"] == "ikinci");
  CHECK(api.post_rating(rating_body("doc0#0", "ayse", "A")).status == 201);
  CHECK(api.next_item("ayse").body["item"]["index"] == 1);
  CHECK(api.next_item("mehmet").body["item"]["index"] == 0);
  CHECK(api.next_item(" ").status == 400);
}

TEST_CASE("api rejects malformed ratings with field errors") {
  qf_test::TempDir dir;
  Fixture f;
  ReviewApi api(f.sets, f.docs, dir / "store.jsonl");
  auto r = api.post_rating(rating_body("doc0#0", "ayse", "F"));
  CHECK(r.status == 400);
  REQUIRE(r.body.contains("violations"));
  CHECK(r.body["violations"][0]["path"] == "rating");
  CHECK(api.post_rating("not json").status == 400);
  CHECK(api.post_rating("[1,2]").status == 400);
  CHECK(api.post_rating(rating_body("nope#9", "ayse", "A")).status == 400);
  CHECK(api.post_rating(R"({"item_id":"doc0#0","annotator_id":"a","rating":"A","comment":5})").status == 400);
  CHECK(api.store().log_size() == 0);
  CHECK(api.item("missing").status == 404);
}

TEST_CASE("api assigns strictly increasing timestamps") {
  qf_test::TempDir dir;
  Fixture f;
  const auto fixed = *UtcTime::parse("2024-01-01T00:00:00Z");
  ReviewApi api(f.sets, f.docs, dir / "store.jsonl", [&] { return fixed; });
  const auto a = api.post_rating(rating_body("doc0#0", "x", "C"));
  const auto b = api.post_rating(rating_body("doc0#0", "x", "A"));
  CHECK(a.body["annotation"]["timestamp"] == "2024-01-01T00:00:00Z");
  CHECK(b.body["annotation"]["timestamp"] == "2024-01-01T00:00:00.001Z");
  CHECK(api.progress("x").body["annotator"]["rated"] == 1);
  CHECK(api.progress(std::nullopt).body["distribution"]["counts"]["A"] == 1);
}

TEST_CASE("api construction validates the inputs") {
  qf_test::TempDir dir;
  Fixture f;
  auto missing_doc = f.docs;
  missing_doc.pop_back();
  CHECK_THROWS_AS(ReviewApi(f.sets, missing_doc, dir / "s.jsonl"), ValidationError);
  auto dup = f.sets;
  dup.push_back(f.sets[0]);
  CHECK_THROWS_AS(ReviewApi(dup, f.docs, dir / "s.jsonl"), ValidationError);
}

TEST_CASE("review flow over http survives a restart") {
  qf_test::TempDir dir;
  Fixture f;
  const auto store = dir / "store.jsonl";
  {
    ReviewApi api(f.sets, f.docs, store);
    ReviewServer server(api);
    const int port = server.start("127.0.0.1", 0);
    httplib::Client client("127.0.0.1", port);

    auto next = body_of(client.Get("/api/items/next?annotator=ayse"));
    CHECK(next["done"] == false);
    CHECK(next["item"]["index"] == 0);
    const std::string first_id = next["item"]["item_id"];

    auto posted = client.Post("/api/ratings", rating_body(first_id, "ayse", "A"), "application/json");
    REQUIRE(posted);
    CHECK(posted->status == 201);

    auto bad = client.Post("/api/ratings", rating_body(first_id, "ayse", "Z"), "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(Json::parse(bad->body)["violations"][0]["path"] == "rating");

    auto item = client.Get("/api/items/doc0%230");
    REQUIRE(item);
    CHECK(item->status == 200);
    CHECK(Json::parse(item->body)["stem"] == "Soru 0?");
    auto missing = client.Get("/api/items/zzz");
    REQUIRE(missing);
    CHECK(missing->status == 404);

    auto rubric = client.Get("/api/rubric");
    REQUIRE(rubric);
    CHECK(Json::parse(rubric->body)["ratings"].size() == 5);
    auto page = client.Get("/");
    REQUIRE(page);
    CHECK(page->status == 200);
    CHECK(page->get_header_value("Content-Type").find("text/html") != std::string::npos);

    for (int i = 1; i < 10; ++i) {
      const auto n = body_of(client.Get("/api/items/next?annotator=ayse"));
      CHECK(n["item"]["index"] == i);
      client.Post("/api/ratings", rating_body(n["item"]["item_id"], "ayse", "B"), "application/json");
    }
    server.stop();
  }
  {
    ReviewApi api(f.sets, f.docs, store);
    ReviewServer server(api);
    const int port = server.start("127.0.0.1", 0);
    httplib::Client client("127.0.0.1", port);
    auto progress = body_of(client.Get("/api/progress?annotator=ayse"));
    CHECK(progress["annotator"]["rated"] == 10);
    CHECK(progress["distribution"]["counts"]["A"] == 1);
    auto item0 = api.store().snapshot()->at({"doc0#0", "ayse"});
    CHECK(item0.rating == Rating::A);

    for (int i = 10; i < 20; ++i) {
      const auto n = body_of(client.Get("/api/items/next?annotator=ayse"));
      CHECK(n["item"]["index"] == i);
      client.Post("/api/ratings", rating_body(n["item"]["item_id"], "ayse", "A"), "application/json");
    }
    auto done = body_of(client.Get("/api/items/next?annotator=ayse"));
    CHECK(done["done"] == true);
    CHECK(done["progress"]["annotator"]["rated"] == 20);
    CHECK(done["progress"]["items"] == 20);
    CHECK(done["progress"]["annotator"]["remaining"] == 0);
    server.stop();
  }
}

TEST_CASE("static directory replaces the placeholder page") {
  qf_test::TempDir dir;
  Fixture f;
  std::filesystem::create_directory(dir / "site");
  qf_test::spit(dir / "site" / "index.html", "<p>derlenmiş arayüz</p>");
  ReviewApi api(f.sets, f.docs, dir / "store.jsonl");
  ReviewServer server(api, dir / "site");
  const int port = server.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);
  auto page = client.Get("/index.html");
  REQUIRE(page);
  CHECK(page->body == "<p>derlenmiş arayüz</p>");
  CHECK(body_of(client.Get("/api/progress"))["items"] == 20);
  server.stop();
  CHECK_THROWS_AS(ReviewServer(api, dir / "absent"), IoError);
}

TEST_CASE("binding a taken port is an io error") {
  qf_test::TempDir dir;
  Fixture f;
  ReviewApi api(f.sets, f.docs, dir / "store.jsonl");
  ReviewServer a(api);
  const int port = a.start("127.0.0.1", 0);
  ReviewServer b(api);
  CHECK_THROWS_AS(b.bind("127.0.0.1", port), IoError);
  a.stop();
}
