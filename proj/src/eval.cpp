#include "quizforge/eval.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

#include "quizforge/assets.hpp"
#include "quizforge/quiz_parser.hpp"
#include "quizforge/stats.hpp"
#include "quizforge/text.hpp"

namespace quizforge::eval {

void EvalRunConfig::validate() const {
  std::vector<Violation> v;
  if (text::is_blank(label)) v.push_back({"label", "must not be empty"});
  if (eval_set.empty()) v.push_back({"eval_set", "must be given"});
  if (!v.empty()) throw ValidationError(std::move(v));
  model.validate();
  policy.validate();
}

std::string content_text(const QuizSet& qs) {
  std::string out;
  auto line = [&](const std::string& s) {
    out += s;
    out += '\n';
  };
  for (const auto& item : qs.items) {
    line(item.stem);
    for (const auto& o : item.options) line(o.text);
    if (const Option* correct = item.correct_option()) line(correct->text);
    if (item.answer_text) line(*item.answer_text);
  }
  return out;
}

rouge::RougeReport mean_scores(std::span<const ItemResult> items) {
  rouge::RougeReport sum;
  std::size_t n = 0;
  auto add = [](rouge::RougeScore& acc, const rouge::RougeScore& s) {
    acc.precision += s.precision;
    acc.recall += s.recall;
    acc.f1 += s.f1;
  };
  for (const auto& item : items) {
    if (!item.scores) continue;
    add(sum.rouge1, item.scores->rouge1);
    add(sum.rouge2, item.scores->rouge2);
    add(sum.rougeL, item.scores->rougeL);
    ++n;
  }
  if (n == 0) return {};
  const auto d = static_cast<double>(n);
  for (auto* s : {&sum.rouge1, &sum.rouge2, &sum.rougeL}) {
    s->precision /= d;
    s->recall /= d;
    s->f1 /= d;
  }
  return sum;
}

Json to_json(const EvalResult& r) {
  Json items = Json::array();
  for (const auto& item : r.items) {
    Json j = {{"record_id", item.record_id},
              {"generated_text", text::sanitize(item.generated_text)},
              {"parsed_ok", item.parsed_ok},
              {"status", item.status},
              {"attempts", item.attempts}};
    if (!item.error.empty()) j["error"] = text::sanitize(item.error);
    if (item.scores) j["scores"] = rouge::to_json(*item.scores);
    items.push_back(std::move(j));
  }
  return {{"model", r.model},
          {"label", r.label},
          {"format", to_string(r.format)},
          {"means", rouge::to_json(r.means)},
          {"counts",
           {{"total", r.total}, {"scored", r.scored}, {"parse_failed", r.parse_failed},
            {"request_failed", r.request_failed}}},
          {"items", items}};
}

EvalResult eval_result_from_json(const Json& j) {
  EvalResult r;
  try {
    r.model = j.at("model").get<std::string>();
    r.label = j.at("label").get<std::string>();
    r.format = parse_quiz_kind(j.at("format").get<std::string>());
    r.means = rouge::report_from_json(j.at("means"));
    if (j.contains("items")) {
      for (const auto& ij : j.at("items")) {
        ItemResult item;
        item.record_id = ij.at("record_id").get<std::string>();
        item.generated_text = ij.value("generated_text", "");
        item.parsed_ok = ij.value("parsed_ok", false);
        item.status = ij.value("status", "");
        item.error = ij.value("error", "");
        item.attempts = ij.value("attempts", 0);
        if (ij.contains("scores")) item.scores = rouge::report_from_json(ij.at("scores"));
        r.items.push_back(std::move(item));
      }
    }
    const Json counts = j.value("counts", Json::object());
    r.total = counts.value("total", r.items.size());
    r.scored = counts.value("scored", std::size_t{0});
    r.parse_failed = counts.value("parse_failed", std::size_t{0});
    r.request_failed = counts.value("request_failed", std::size_t{0});
  } catch (const Json::exception& e) {
    throw ValidationError("$", fmt::format("malformed eval result: {}", e.what()));
  }
  if (text::is_blank(r.model)) throw ValidationError("model", "must not be empty");
  if (text::is_blank(r.label)) throw ValidationError("label", "must not be empty");
  return r;
}

EvalResult read_eval_result(const std::filesystem::path& path) {
  const auto content = io::read_file(path);
  try {
    return eval_result_from_json(Json::parse(content));
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string(), e.what());
  }
}

std::vector<EvalResult> read_eval_results(const std::filesystem::path& path) {
  if (path.extension() != ".jsonl") return {read_eval_result(path)};
  std::vector<EvalResult> out;
  std::vector<Violation> problems;
  for (const auto& line : io::read_jsonl_lines(path)) {
    try {
      out.push_back(eval_result_from_json(Json::parse(line.text)));
    } catch (const Json::parse_error& e) {
      problems.push_back({fmt::format("line {}", line.line_no), e.what()});
    } catch (const ValidationError& e) {
      for (const auto& v : e.violations()) problems.push_back({fmt::format("line {}: {}", line.line_no, v.path), v.message});
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return out;
}

EvalResult evaluate_model(const EvalRunConfig& cfg, generation::ChatTransport& transport,
                          const generation::BatchOptions& options) {
  cfg.validate();
  std::vector<dataset::InstructRecord> records;
  for (auto& r : dataset::read_instruct_records(cfg.eval_set)) {
    if (r.meta.format == cfg.format) records.push_back(std::move(r));
  }

  EvalResult result;
  result.model = cfg.display_name.empty() ? cfg.model.model_name : cfg.display_name;
  result.label = cfg.label;
  result.format = cfg.format;
  result.items.resize(records.size());

  generation::RateLimiter limiter(cfg.policy.requests_per_minute,
                                  std::min(cfg.policy.max_concurrency, cfg.policy.requests_per_minute), options.sleep);
  generation::parallel_for(records.size(), cfg.policy.max_concurrency, [&](std::size_t i) {
    const auto& rec = records[i];
    const std::string prompt = rec.instruction + "\n\n" + rec.input;
    const ExpectedShape shape{cfg.format, 0, std::nullopt};
    auto outcome = generation::generate_with_policy(rec.meta.doc_id, prompt, shape, cfg.model, cfg.policy, transport,
                                                    limiter, options);
    ItemResult item;
    item.record_id = rec.record_id();
    item.generated_text = outcome.raw_text;
    item.attempts = outcome.attempts;
    item.status = std::string(generation::to_string(outcome.status));
    item.error = outcome.error;
    item.parsed_ok = outcome.ok();
    if (outcome.ok()) {
      std::string reference;
      try {
        reference = content_text(parse_quiz(rec.output, {cfg.format, 0, std::nullopt}, rec.meta.doc_id));
      } catch (const ParseError&) {
        reference = rec.output;
      }
      item.scores = rouge::rouge_report(rouge::normalize_tr(content_text(*outcome.quiz_set)),
                                        rouge::normalize_tr(reference));
    }
    result.items[i] = std::move(item);
  });

  result.total = result.items.size();
  for (const auto& item : result.items) {
    if (item.scores) ++result.scored;
    if (item.status == "parse_failed") ++result.parse_failed;
    if (item.status == "request_failed") ++result.request_failed;
  }
  result.means = mean_scores(result.items);
  return result;
}

// ---------------------------------------------------------------------------
// Reports

ComparisonTable compare_runs(std::span<const EvalResult> results) {
  ComparisonTable t;
  for (const auto& r : results) {
    t.rows.push_back({fmt::format("{} {}", r.model, r.label), r.format, r.means.rouge1.f1 * 100.0,
                      r.means.rouge2.f1 * 100.0, r.means.rougeL.f1 * 100.0});
  }
  return t;
}

namespace {

std::string two(double v) { return fmt::format("{:.2f}", v); }

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string format_upper(QuizKind k) { return k == QuizKind::Mcq ? "MCQ" : "SAQ"; }

}  // namespace

std::string render_text(const ComparisonTable& t) {
  std::string out = "model: ROUGE-1 / ROUGE-2 / ROUGE-L (F1 x 100)\n";
  std::optional<QuizKind> section;
  for (const auto& row : t.rows) {
    if (section != row.format) {
      section = row.format;
      out += fmt::format("[{}]\n", format_upper(row.format));
    }
    out += fmt::format("{}: {} / {} / {}\n", row.name, two(row.rouge1), two(row.rouge2), two(row.rougeL));
  }
  return out;
}

std::string render_markdown(const ComparisonTable& t) {
  std::string out = "| Model | Format | ROUGE-1 | ROUGE-2 | ROUGE-L |\n|---|---|---:|---:|---:|\n";
  for (const auto& row : t.rows) {
    out += fmt::format("| {} | {} | {} | {} | {} |\n", row.name, format_upper(row.format), two(row.rouge1),
                       two(row.rouge2), two(row.rougeL));
  }
  return out;
}

std::string render_html(const ComparisonTable& t) {
  std::string out =
      "<!DOCTYPE html>\n<html lang=\"tr\">\n<head>\n<meta charset=\"utf-8\">\n<title>ROUGE comparison</title>\n"
      "<style>table{border-collapse:collapse}td,th{border:1px solid #999;padding:4px 8px}"
      "td.n{text-align:right}</style>\n</head>\n<body>\n<table>\n"
      "<tr><th>Model</th><th>Format</th><th>ROUGE-1</th><th>ROUGE-2</th><th>ROUGE-L</th></tr>\n";
  for (const auto& row : t.rows) {
    out += fmt::format("<tr><td>{}</td><td>{}</td><td class=\"n\">{}</td><td class=\"n\">{}</td>"
                       "<td class=\"n\">{}</td></tr>\n",
                       html_escape(row.name), format_upper(row.format), two(row.rouge1), two(row.rouge2),
                       two(row.rougeL));
  }
  out += "</table>\n</body>\n</html>\n";
  return out;
}

Json render_json(const ComparisonTable& t) {
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    rows.push_back({{"name", row.name},
                    {"format", to_string(row.format)},
                    {"rouge1", two(row.rouge1)},
                    {"rouge2", two(row.rouge2)},
                    {"rougeL", two(row.rougeL)}});
  }
  return {{"scale", "f1 x 100"}, {"rows", rows}};
}

// ---------------------------------------------------------------------------
// Review sampling

std::vector<QuizSet> sample_for_review(std::span<const QuizSet> sets, std::span<const SourceDocument> corpus,
                                       std::size_t n, std::uint64_t seed, bool stratify_by_subject) {
  struct Ref {
    std::size_t set;
    std::size_t item;
  };
  std::vector<Ref> all;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (std::size_t i = 0; i < sets[s].items.size(); ++i) all.push_back({s, i});
  }
  if (n > all.size()) {
    throw InsufficientItems(fmt::format("asked for {} items but only {} are available", n, all.size()));
  }

  std::vector<std::size_t> chosen;
  if (!stratify_by_subject) {
    std::vector<std::size_t> idx(all.size());
    std::iota(idx.begin(), idx.end(), 0);
    dataset::seeded_shuffle(idx, seed);
    chosen.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
  } else {
    std::unordered_map<std::string, std::string> subject_of;
    for (const auto& d : corpus) subject_of.emplace(d.id, d.subject.slug());
    std::map<std::string, std::vector<std::size_t>> strata;
    for (std::size_t k = 0; k < all.size(); ++k) {
      auto it = subject_of.find(sets[all[k].set].doc_id);
      strata[it == subject_of.end() ? Subject().slug() : it->second].push_back(k);
    }
    std::vector<std::vector<std::size_t>*> groups;
    std::uint64_t stratum_seed = seed;
    for (auto& [slug, members] : strata) {
      dataset::seeded_shuffle(members, stratum_seed++);
      groups.push_back(&members);
    }
    std::vector<std::size_t> quota(groups.size(), 0);
    std::size_t remaining = n;
    // Round-robin one item at a time: equal shares, shortfalls go to the
    // strata that still have items.
    while (remaining > 0) {
      for (std::size_t g = 0; g < groups.size() && remaining > 0; ++g) {
        if (quota[g] < groups[g]->size()) {
          ++quota[g];
          --remaining;
        }
      }
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      chosen.insert(chosen.end(), groups[g]->begin(), groups[g]->begin() + static_cast<std::ptrdiff_t>(quota[g]));
    }
  }
  std::sort(chosen.begin(), chosen.end());

  std::vector<QuizSet> out;
  std::optional<std::size_t> current;
  for (auto k : chosen) {
    const auto& ref = all[k];
    if (current != ref.set) {
      current = ref.set;
      QuizSet qs = sets[ref.set];
      qs.items.clear();
      out.push_back(std::move(qs));
    }
    out.back().items.push_back(sets[ref.set].items[ref.item]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Annotations

bool supersedes(const Annotation& a, const Annotation& b) {
  const auto key = [](const Annotation& x) {
    return std::tuple(x.timestamp, to_char(x.rating), x.comment.value_or(""));
  };
  return key(a) > key(b);
}

std::map<AnnotationKey, Annotation> effective_annotations(std::span<const Annotation> log) {
  std::map<AnnotationKey, Annotation> out;
  for (const auto& a : log) {
    AnnotationKey key{a.item_id, a.annotator_id};
    auto it = out.find(key);
    if (it == out.end()) {
      out.emplace(std::move(key), a);
    } else if (supersedes(a, it->second)) {
      it->second = a;
    }
  }
  return out;
}

AnnotationStore::AnnotationStore(const std::filesystem::path& path)
    : log_([&] {
        std::error_code ec;
        if (std::filesystem::exists(path, ec) && !std::filesystem::is_regular_file(path, ec)) {
          throw IoError(path, "annotation store is not a regular file");
        }
        return path;
      }()) {
  std::vector<Annotation> entries;
  for (const auto& line : io::read_jsonl_lines(path)) {
    try {
      entries.push_back(deserialize<Annotation>(line.text));
    } catch (const ValidationError& e) {
      ++skipped_;
      spdlog::warn("{}:{}: skipping unreadable annotation ({})", path.string(), line.line_no, e.what());
    }
  }
  log_size_ = entries.size();
  snapshot_ = std::make_shared<const Snapshot>(effective_annotations(entries));
}

void AnnotationStore::append(const Annotation& a) {
  if (auto v = validate(a); !v.empty()) throw ValidationError(std::move(v));
  std::lock_guard lock(mu_);
  log_.append(serialize(a));
  auto next = std::make_shared<Snapshot>(*snapshot_);
  AnnotationKey key{a.item_id, a.annotator_id};
  auto it = next->find(key);
  if (it == next->end()) {
    next->emplace(std::move(key), a);
  } else if (supersedes(a, it->second)) {
    it->second = a;
  }
  std::atomic_store(&snapshot_, std::shared_ptr<const Snapshot>(std::move(next)));
  ++log_size_;
}

std::shared_ptr<const AnnotationStore::Snapshot> AnnotationStore::snapshot() const {
  return std::atomic_load(&snapshot_);
}

std::size_t AnnotationStore::log_size() const {
  std::lock_guard lock(mu_);
  return log_size_;
}

namespace {

void finish(RatingDistribution& d) {
  const std::vector<std::size_t> counts(d.counts.begin(), d.counts.end());
  const auto pct = stats::rounded_percentages(counts, 1);
  std::copy(pct.begin(), pct.end(), d.percentages.begin());
}

RatingDistribution aggregate_effective(const std::map<AnnotationKey, Annotation>& effective) {
  RatingDistribution d;
  for (const auto& [key, a] : effective) {
    const auto r = static_cast<std::size_t>(a.rating);
    ++d.counts[r];
    ++d.total;
    auto& per = d.per_annotator[a.annotator_id];
    ++per.counts[r];
    ++per.total;
  }
  finish(d);
  for (auto& [id, per] : d.per_annotator) finish(per);
  return d;
}

}  // namespace

RatingDistribution aggregate_ratings(std::span<const Annotation> log) {
  return aggregate_effective(effective_annotations(log));
}

RatingDistribution aggregate_ratings(const AnnotationStore& store) { return aggregate_effective(*store.snapshot()); }

Json to_json(const RatingDistribution& d) {
  auto one = [](const RatingDistribution& x) {
    Json counts = Json::object();
    Json pct = Json::object();
    for (auto r : kAllRatings) {
      const std::string key(1, to_char(r));
      counts[key] = x.count(r);
      pct[key] = x.percentage(r);
    }
    return Json{{"total", x.total}, {"counts", counts}, {"percentages", pct}};
  };
  Json j = one(d);
  Json per = Json::object();
  for (const auto& [id, x] : d.per_annotator) per[id] = one(x);
  j["per_annotator"] = per;
  return j;
}

std::string_view rubric_json() { return *assets::find("rubric.json"); }

}  // namespace quizforge::eval
