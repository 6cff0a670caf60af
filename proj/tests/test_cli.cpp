#include <doctest.h>

#include <sstream>

#include "quizforge/cli.hpp"
#include "quizforge/io.hpp"
#include "quizforge/version.hpp"
#include "support.hpp"

using namespace quizforge;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run qf(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("version and help") {
  const auto v = qf({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(std::string(kVersion)) != std::string::npos);
  CHECK(qf({"--help"}).code == 0);
  CHECK(qf({"dataset", "split", "--help"}).code == 0);
}

TEST_CASE("usage errors exit with one") {
  CHECK(qf({}).code == 1);
  CHECK(qf({"frobnicate"}).code == 1);
  CHECK(qf({"corpus", "clean", "--in", "/nonexistent/file.jsonl", "--out", "x"}).code == 1);
  CHECK(qf({"--log-level", "loud", "stats"}).code == 1);
}

TEST_CASE("clean and stats on the fixture") {
  qf_test::TempDir dir;
  const auto docs = (dir / "docs.jsonl").string();
  const auto r = qf({"corpus", "clean", "--in", qf_test::fixture("raw_corpus.jsonl").string(), "--out", docs});
  CHECK(r.code == 0);
  CHECK(io::read_records<SourceDocument>(docs).size() == 10);
  CHECK(std::filesystem::exists(dir / "docs.rejects.json"));

  const auto strict = qf({"--json", "corpus", "clean", "--in", qf_test::fixture("raw_corpus.jsonl").string(), "--out",
                          (dir / "strict.jsonl").string(), "--min-tokens", "125"});
  CHECK(strict.code == 0);
  const auto j = Json::parse(strict.out);
  CHECK(j["kept"].get<int>() + j["too_short"].get<int>() + j["too_long"].get<int>() == 10);
  CHECK(j["too_short"].get<int>() > 0);

  const auto stats = qf({"--json", "stats", "--corpus", docs});
  CHECK(stats.code == 0);
  CHECK(Json::parse(stats.out).contains("subjects"));

  CHECK(qf({"corpus", "clean", "--in", qf_test::fixture("raw_corpus.jsonl").string(), "--out", docs, "--min-tokens",
            "500", "--max-tokens", "100"})
            .code == 1);
}

TEST_CASE("io failures exit with two") {
  qf_test::TempDir dir;
  qf_test::spit(dir / "blocker", "x");
  const auto r = qf({"corpus", "clean", "--in", qf_test::fixture("raw_corpus.jsonl").string(), "--out",
                     (dir / "blocker" / "docs.jsonl").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("error") != std::string::npos);
}

TEST_CASE("generation exit codes follow the worst outcome") {
  qf_test::TempDir dir;
  const auto docs = (dir / "docs.jsonl").string();
  REQUIRE(qf({"corpus", "clean", "--in", qf_test::fixture("raw_corpus.jsonl").string(), "--out", docs}).code == 0);
  auto gen = [&](const std::string& endpoint, const std::string& out) {
    return qf({"generate", "--corpus", docs, "--model", "m", "--endpoint", endpoint, "--out", (dir / out).string(),
               "--rpm", "60000", "--max-retries", "0", "--backoff", "0"});
  };
  CHECK(gen("mock://quiz", "ok.jsonl").code == 0);
  CHECK(gen("mock://garbage", "bad.jsonl").code == 1);
  CHECK(gen("mock://status?code=503", "down.jsonl").code == 2);
  CHECK(io::read_records<QuizSet>(dir / "ok.jsonl").size() == 10);
  CHECK(qf({"generate", "--corpus", docs, "--model", "m", "--endpoint", "mock://nonsense", "--out",
            (dir / "x.jsonl").string()})
            .code == 1);
}

TEST_CASE("score gate exit codes") {
  qf_test::TempDir dir;
  const auto docs = (dir / "docs.jsonl").string();
  const auto quiz = (dir / "quiz.jsonl").string();
  REQUIRE(qf({"corpus", "clean", "--in", qf_test::fixture("raw_corpus.jsonl").string(), "--out", docs}).code == 0);
  REQUIRE(qf({"generate", "--corpus", docs, "--model", "m", "--endpoint", "mock://quiz", "--out", quiz, "--rpm",
              "60000"})
              .code == 0);
  CHECK(qf({"score", "--quiz", quiz, "--corpus", docs, "--out", (dir / "s.json").string()}).code == 0);
  CHECK(qf({"score", "--quiz", quiz, "--corpus", docs, "--gate-min", "1.1"}).code == 1);
  CHECK(qf({"score", "--quiz", quiz, "--corpus", docs, "--gate-min", "0.99", "--fail-on-gate"}).code == 1);
  CHECK(qf({"score", "--quiz", quiz, "--corpus", docs, "--gate-min", "0.99"}).code == 0);
}

TEST_CASE("config file supplies subcommand options") {
  qf_test::TempDir dir;
  std::string records;
  for (int d = 0; d < 6; ++d) {
    records += Json{{"instruction", "Soru hazırla"},
                    {"input", "metin " + std::to_string(d)},
                    {"output", "1. S?\nCevap: c"},
                    {"meta", {{"doc_id", "d" + std::to_string(d)}, {"subject", "history"}, {"format", "saq"}}}}
                   .dump() +
               "\n";
  }
  qf_test::spit(dir / "records.jsonl", records);
  qf_test::spit(dir / "cfg.toml", "[dataset.split]\nrecords = \"" + (dir / "records.jsonl").string() +
                                      "\"\ntrain = 4\neval = 2\nseed = 9\nout-dir = \"" + (dir / "a").string() + "\"\n");
  CHECK(qf({"--config", (dir / "cfg.toml").string(), "dataset", "split"}).code == 0);
  CHECK(io::read_jsonl_lines(dir / "a" / "train.jsonl").size() == 4);
  CHECK(qf({"--config", (dir / "cfg.toml").string(), "dataset", "split", "--train", "3", "--out-dir",
            (dir / "b").string()})
            .code == 0);
  CHECK(io::read_jsonl_lines(dir / "b" / "train.jsonl").size() == 3);
  CHECK(qf({"--config", (dir / "cfg.toml").string(), "dataset", "split", "--train", "5"}).code == 1);
}

TEST_CASE("report rendering from result files") {
  const auto r = qf({"eval", "report", "--in", qf_test::fixture("reported_runs.jsonl").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("GPT3.5 Turbo finetuned: 36.64 / 20.36 / 28.82") != std::string::npos);
  const auto md = qf({"eval", "report", "--in", qf_test::fixture("reported_runs.jsonl").string(), "--render", "markdown"});
  CHECK(md.out.find("| Llama2-chat 7B finetuned | SAQ | 54.37 | 47.33 | 49.01 |") != std::string::npos);
}

TEST_CASE("fine-tune configs are emitted for every model") {
  qf_test::TempDir dir;
  CHECK(qf({"dataset", "emit-config", "--out", (dir / "ft").string()}).code == 0);
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "ft")) {
    (void)e;
    ++files;
  }
  CHECK(files == 3);
  CHECK(qf({"dataset", "emit-config", "--model", "gpt-9", "--out", (dir / "x.json").string()}).code == 1);
}

TEST_CASE("review aggregate over a rating log") {
  qf_test::TempDir dir;
  std::string log;
  for (int i = 0; i < 30; ++i) {
    log += Json{{"item_id", "i" + std::to_string(i)},
                {"annotator_id", "j"},
                {"rating", i < 28 ? "A" : "C"},
                {"timestamp", "2024-01-01T00:00:00Z"}}
               .dump() +
           "\n";
  }
  qf_test::spit(dir / "r.jsonl", log);
  const auto r = qf({"review", "aggregate", "--store", (dir / "r.jsonl").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("93.3%") != std::string::npos);
}
