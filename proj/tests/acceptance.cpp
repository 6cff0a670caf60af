#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "oracles.hpp"
#include "quizforge/cli.hpp"
#include "quizforge/dataset.hpp"
#include "quizforge/eval.hpp"
#include "quizforge/io.hpp"
#include "quizforge/quiz_parser.hpp"
#include "quizforge/rouge.hpp"
#include "quizforge/transform.hpp"
#include "support.hpp"

using namespace quizforge;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool close(double a, double b) { return std::abs(a - b) <= 1e-12; }

Outcome rouge_oracle_equivalence() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  for (int i = 0; i < 1000 && o.pass; ++i) {
    const auto c = qf_oracle::random_seq(rng, 12, 6);
    const auto r = qf_oracle::random_seq(rng, 12, 6);
    auto same = [&](const rouge::RougeScore& got, const qf_oracle::Prf& want) {
      return close(got.precision, want.p) && close(got.recall, want.r) && close(got.f1, want.f);
    };
    o.require(same(rouge::rouge_n(c, r, 1), qf_oracle::rouge_n(c, r, 1)), fmt::format("rouge-1 differs on pair {}", i));
    o.require(same(rouge::rouge_n(c, r, 2), qf_oracle::rouge_n(c, r, 2)), fmt::format("rouge-2 differs on pair {}", i));
    o.require(same(rouge::rouge_l(c, r), qf_oracle::rouge_l(c, r)), fmt::format("rouge-l differs on pair {}", i));
  }
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, fmt::format("took {:.2f}s", secs));
  if (o.pass) o.detail = fmt::format("1000 pairs in {:.2f}s", secs);
  return o;
}

Outcome hand_checked_pair() {
  Outcome o;
  const auto c = rouge::normalize_tr("kedi evde uyur");
  const auto r = rouge::normalize_tr("kedi bahçede uyur");
  // Oracle: 2 shared unigrams, LCS "kedi uyur", 3 tokens each side.
  const double expected = qf_oracle::prf(2, 3, 3).f;
  const double r1 = rouge::rouge_n(c, r, 1).f1;
  const double rl = rouge::rouge_l(c, r).f1;
  o.require(close(expected, 2.0 / 3.0), "oracle disagrees with 2/3");
  o.require(close(r1, 2.0 / 3.0), fmt::format("rouge-1 f1 {}", r1));
  o.require(close(rl, 2.0 / 3.0), fmt::format("rouge-l f1 {}", rl));
  if (o.pass) o.detail = "rouge-1 = rouge-l = 2/3";
  return o;
}

Outcome lcs_below_unigram() {
  Outcome o;
  std::mt19937_64 rng(1003);
  for (int i = 0; i < 1000 && o.pass; ++i) {
    const auto c = qf_oracle::random_seq(rng, 12, 6);
    const auto r = qf_oracle::random_seq(rng, 12, 6);
    o.require(rouge::rouge_l(c, r).f1 <= rouge::rouge_n(c, r, 1).f1, fmt::format("violated on pair {}", i));
  }
  if (o.pass) o.detail = "1000 pairs";
  return o;
}

Outcome turkish_casing() {
  Outcome o;
  o.require(rouge::normalize_tr("İstanbul") == rouge::Tokens{"istanbul"}, "İstanbul");
  o.require(rouge::normalize_tr("ISPARTA") == rouge::Tokens{"ısparta"}, "ISPARTA");
  if (o.pass) o.detail = "istanbul, ısparta";
  return o;
}

Outcome mcq_to_saq_properties() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1005);
  for (int i = 0; i < 500 && o.pass; ++i) {
    const auto mcq = qf_test::random_quiz_set(rng, QuizKind::Mcq, "doc-" + std::to_string(i));
    o.require(validate(mcq).empty(), "generator produced an invalid set");
    const auto saq = transform::mcq_to_saq(mcq);
    o.require(saq.items.size() == mcq.items.size(), fmt::format("item count changed in set {}", i));
    const auto out = serialize(saq);
    for (std::size_t k = 0; k < saq.items.size() && o.pass; ++k) {
      const auto& m = mcq.items[k];
      const auto& s = saq.items[k];
      o.require(s.item_id == m.item_id, fmt::format("id changed: {}", m.item_id));
      o.require(s.answer_text == m.correct_option()->text, fmt::format("wrong answer for {}", m.item_id));
      o.require(s.options.empty(), fmt::format("options kept for {}", m.item_id));
      for (const auto& opt : m.options) {
        if (opt.label == *m.correct_label) continue;
        o.require(out.find(Json(opt.text).dump()) == std::string::npos,
                  fmt::format("distractor '{}' leaked from {}", opt.text, m.item_id));
      }
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 5.0, fmt::format("took {:.2f}s", secs));
  if (o.pass) o.detail = fmt::format("500 sets in {:.2f}s", secs);
  return o;
}

Outcome split_correctness() {
  Outcome o;
  std::vector<dataset::InstructRecord> records;
  for (int d = 0; d < 8260; ++d) {
    for (auto fmt_kind : {QuizKind::Mcq, QuizKind::Saq}) {
      dataset::InstructRecord r;
      r.instruction = "Soru hazırla";
      r.input = "Metin " + std::to_string(d);
      r.output = "1. Soru?\nCevap: " + std::to_string(d);
      r.meta = {fmt::format("doc-{:05}", d), d % 3 ? "history" : "biology", fmt_kind};
      records.push_back(std::move(r));
    }
  }
  qf_test::TempDir dir;
  const std::uint64_t seed = 20240601;
  const auto a = dataset::split(records, 8000, 260, seed);
  const auto b = dataset::split(records, 8000, 260, seed);
  std::set<std::string> train_docs, eval_docs;
  for (const auto& r : a.train) train_docs.insert(r.meta.doc_id);
  for (const auto& r : a.eval) eval_docs.insert(r.meta.doc_id);
  o.require(train_docs.size() == 8000, fmt::format("train has {} docs", train_docs.size()));
  o.require(eval_docs.size() == 260, fmt::format("eval has {} docs", eval_docs.size()));
  for (const auto& id : eval_docs) {
    if (train_docs.count(id)) {
      o.require(false, "document on both sides: " + id);
      break;
    }
  }
  const auto ea = dataset::emit_jsonl(a, dir / "a");
  const auto eb = dataset::emit_jsonl(b, dir / "b");
  o.require(qf_test::slurp(ea.train.path) == qf_test::slurp(eb.train.path), "train.jsonl differs between runs");
  o.require(qf_test::slurp(ea.eval.path) == qf_test::slurp(eb.eval.path), "eval.jsonl differs between runs");
  o.require(qf_test::slurp(ea.manifest) == qf_test::slurp(eb.manifest), "manifest differs between runs");
  if (o.pass) o.detail = "8000/260 docs, disjoint, byte-identical";
  return o;
}

Outcome parser_round_trip() {
  Outcome o;
  std::mt19937_64 rng(1007);
  int ok = 0;
  for (int i = 0; i < 500; ++i) {
    const auto kind = i % 2 ? QuizKind::Saq : QuizKind::Mcq;
    const auto qs = qf_test::random_quiz_set(rng, kind, "doc-" + std::to_string(i));
    for (auto layout : {QuizLayout::Json, QuizLayout::Lettered}) {
      try {
        const auto parsed = parse_quiz(format_quiz(qs, layout), {kind, 0, std::nullopt}, qs.doc_id);
        if (parsed.items == qs.items && parsed.format == qs.format) {
          ++ok;
        } else {
          o.require(false, fmt::format("set {} changed in {} layout", i, layout == QuizLayout::Json ? "json" : "lettered"));
        }
      } catch (const Error& e) {
        o.require(false, fmt::format("set {}: {}", i, e.what()));
      }
    }
  }
  if (o.pass) o.detail = fmt::format("{}/1000 round trips", ok);
  return o;
}

Outcome finetune_configs() {
  Outcome o;
  qf_test::TempDir dir;
  auto load = [&](dataset::ModelKind k) {
    const auto path = dir / (std::string(dataset::to_string(k)) + ".json");
    dataset::emit_finetune_config(k, path);
    return Json::parse(qf_test::slurp(path));
  };
  const auto gpt = load(dataset::ModelKind::GPT35Turbo);
  o.require(gpt["batch_size"] == 16 && gpt["learning_rate"] == 0.001 && gpt["epochs"] == 3 &&
                gpt["method"] == "full-service-api" && !gpt.contains("peft_r"),
            "gpt-3.5-turbo: " + gpt.dump());
  for (auto k : {dataset::ModelKind::Llama2Chat7B, dataset::ModelKind::Llama2Chat13B}) {
    const auto j = load(k);
    o.require(j["method"] == "peft" && j["peft_r"] == 16 && j["peft_alpha"] == 32 && j["batch_size"] == 64 &&
                  j["learning_rate"] == 0.0001 && j["epochs"] == 3,
              std::string(dataset::to_string(k)) + ": " + j.dump());
  }
  if (o.pass) o.detail = "gpt-3.5-turbo, llama-2-7b-chat, llama-2-13b-chat";
  return o;
}

// Every non-blank line parses as JSON and passes the given reader.
bool valid_jsonl(const std::filesystem::path& p, const std::function<void(const Json&)>& check, std::size_t& lines) {
  lines = 0;
  try {
    for (const auto& l : io::read_jsonl_lines(p)) {
      check(Json::parse(l.text));
      ++lines;
    }
  } catch (const std::exception&) {
    return false;
  }
  return lines > 0;
}

Outcome end_to_end_mock_run() {
  Outcome o;
  const auto t0 = Clock::now();
  qf_test::TempDir dir;
  auto path = [&](const std::string& name) { return (dir / name).string(); };
  auto step = [&](const std::string& name, std::vector<std::string> args) {
    if (!o.pass) return;
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    o.require(code == 0, fmt::format("{} exited {}: {}", name, code, err.str()));
  };
  auto check_jsonl = [&](const std::string& name, const std::function<void(const Json&)>& reader) {
    if (!o.pass) return;
    std::size_t lines = 0;
    o.require(valid_jsonl(dir / name, reader, lines), name + " is not valid JSONL");
  };
  const auto as_doc = [](const Json& j) { from_json<SourceDocument>(j); };
  const auto as_set = [](const Json& j) { from_json<QuizSet>(j); };
  const auto as_record = [](const Json& j) { dataset::record_from_json(j); };

  step("clean", {"corpus", "clean", "--in", qf_test::fixture("raw_corpus.jsonl").string(), "--out", path("docs.jsonl")});
  check_jsonl("docs.jsonl", as_doc);
  step("generate", {"generate", "--corpus", path("docs.jsonl"), "--model", "mock", "--endpoint", "mock://quiz",
                    "--out", path("mcq.jsonl"), "--rpm", "60000", "--generated-at", "2024-06-01T00:00:00Z"});
  check_jsonl("mcq.jsonl", as_set);
  check_jsonl("mcq.outcomes.jsonl", [](const Json& j) { generation::outcome_from_json(j); });
  step("score", {"score", "--quiz", path("mcq.jsonl"), "--corpus", path("docs.jsonl"), "--out", path("score.json"),
                 "--passed-out", path("passed.jsonl")});
  check_jsonl("passed.jsonl", as_set);
  step("transform", {"transform", "mcq-to-saq", "--in", path("passed.jsonl"), "--out", path("saq.jsonl")});
  check_jsonl("saq.jsonl", as_set);
  step("build", {"dataset", "build", "--quiz", path("passed.jsonl"), "--quiz", path("saq.jsonl"), "--corpus",
                 path("docs.jsonl"), "--out", path("records.jsonl")});
  check_jsonl("records.jsonl", as_record);
  step("split", {"dataset", "split", "--records", path("records.jsonl"), "--train", "7", "--eval", "3", "--seed", "42",
                 "--out-dir", path("ds")});
  check_jsonl("ds/train.jsonl", as_record);
  check_jsonl("ds/eval.jsonl", as_record);
  if (o.pass) {
    std::size_t n = 0;
    valid_jsonl(dir / "ds" / "train.jsonl", as_record, n);
    o.require(n == 14, fmt::format("train.jsonl has {} records", n));
    valid_jsonl(dir / "ds" / "eval.jsonl", as_record, n);
    o.require(n == 6, fmt::format("eval.jsonl has {} records", n));
  }
  step("emit-config", {"dataset", "emit-config", "--out", path("ft")});
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, fmt::format("took {:.2f}s", secs));
  if (o.pass) o.detail = fmt::format("10 documents, 7 stages, {:.2f}s, in-process mock endpoint", secs);
  return o;
}

Outcome report_layout_and_rating_share() {
  Outcome o;
  const auto runs = eval::read_eval_results(qf_test::fixture("reported_runs.jsonl"));
  const auto text = eval::render_text(eval::compare_runs(runs));
  const auto mcq_at = text.find("[MCQ]");
  const auto saq_at = text.find("[SAQ]");
  const auto mcq_row = text.find("GPT3.5 Turbo finetuned: 36.64 / 20.36 / 28.82");
  const auto saq_row = text.find("Llama2-chat 7B finetuned: 54.37 / 47.33 / 49.01");
  o.require(mcq_row != std::string::npos && mcq_at < mcq_row && mcq_row < saq_at, "MCQ row missing");
  o.require(saq_row != std::string::npos && saq_at < saq_row, "SAQ row missing");

  qf_test::TempDir dir;
  eval::AnnotationStore store(dir / "ratings.jsonl");
  for (int i = 0; i < 30; ++i) {
    Annotation a;
    a.item_id = fmt::format("doc-{}#0", i);
    a.annotator_id = "judge";
    a.rating = i < 28 ? Rating::A : (i == 28 ? Rating::B : Rating::D);
    a.timestamp = *UtcTime::parse(fmt::format("2024-06-01T10:00:{:02}Z", i));
    store.append(a);
  }
  const auto d = eval::aggregate_ratings(store);
  o.require(d.total == 30 && d.count(Rating::A) == 28, "unexpected counts");
  o.require(d.percentage(Rating::A) == 93.3, fmt::format("RATING-A share {}", d.percentage(Rating::A)));
  if (o.pass) o.detail = "both rows rendered; RATING-A 93.3%";
  return o;
}

Outcome gate_monotonicity() {
  Outcome o;
  std::mt19937_64 rng(1011);
  const std::vector<std::string> words = {"atom", "çekirdek", "proton", "nötron", "elektron", "enerji", "düzey", "izotop"};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sentence = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += (i ? " " : "") + words[pick(rng)];
    return s;
  };
  int comparisons = 0;
  for (int round = 0; round < 300 && o.pass; ++round) {
    const auto doc = qf_test::make_doc("d", SubjectKind::Chemistry, sentence(25));
    QuizSet qs{"d", QuizKind::Mcq, {}, {}};
    for (int i = 0; i < 4; ++i) {
      qs.items.push_back(QuizItem::mcq(make_item_id("d", static_cast<std::size_t>(i)), sentence(6) + "?",
                                       {sentence(1) + " 1", sentence(1) + " 2", sentence(1) + " 3"}, 'A'));
    }
    std::vector<double> mins = {0.0};
    for (int k = 0; k < 8; ++k) mins.push_back(unit(rng));
    for (const auto& item : rouge::score_quiz(qs, doc).items) mins.push_back(item.report.rougeL.f1);
    std::sort(mins.begin(), mins.end());
    for (auto agg : {rouge::Aggregate::PerItem, rouge::Aggregate::MeanOverSet}) {
      std::optional<rouge::GateResult> prev;
      for (double m : mins) {
        const auto g = rouge::quality_gate(qs, doc, rouge::GateConfig{m, std::nullopt, agg});
        if (prev) {
          for (std::size_t i = 0; i < qs.items.size(); ++i) {
            o.require(prev->item_passed[i] || !g.item_passed[i], fmt::format("item {} flipped to pass at {}", i, m));
          }
          o.require(prev->set_passed || !g.set_passed, fmt::format("set flipped to pass at {}", m));
          ++comparisons;
        }
        prev = g;
      }
    }
  }
  if (o.pass) o.detail = fmt::format("{} threshold steps", comparisons);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"rouge-oracle-equivalence", rouge_oracle_equivalence},
      {"hand-checked-metric-case", hand_checked_pair},
      {"rouge-l-at-most-rouge-1", lcs_below_unigram},
      {"turkish-casing", turkish_casing},
      {"mcq-to-saq-properties", mcq_to_saq_properties},
      {"split-correctness", split_correctness},
      {"parser-round-trip", parser_round_trip},
      {"finetune-config-emission", finetune_configs},
      {"end-to-end-mock-run", end_to_end_mock_run},
      {"report-layout-and-rating-share", report_layout_and_rating_share},
      {"gate-monotonicity", gate_monotonicity},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " - " << o.detail << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - static_cast<std::size_t>(failures),
                           criteria.size())
            << std::endl;
  return failures == 0 ? 0 : 1;
}
