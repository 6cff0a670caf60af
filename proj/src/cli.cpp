#include "quizforge/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <ostream>
#include <unordered_map>

#include "quizforge/corpus.hpp"
#include "quizforge/dataset.hpp"
#include "quizforge/eval.hpp"
#include "quizforge/generation.hpp"
#include "quizforge/io.hpp"
#include "quizforge/mock_endpoint.hpp"
#include "quizforge/prompting.hpp"
#include "quizforge/review.hpp"
#include "quizforge/rouge.hpp"
#include "quizforge/transform.hpp"
#include "quizforge/version.hpp"

namespace quizforge::cli {

namespace fs = std::filesystem;

namespace {

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool json = false;

  /// Prints the machine-readable summary with --json, the text otherwise.
  void report(const Json& summary, const std::string& text) const {
    if (json) {
      out << summary.dump(2) << '\n';
    } else {
      out << text;
    }
  }
};

void setup_logging(const std::string& level) {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("quizforge");
    logger->set_pattern("%^%l%$: %v");
    spdlog::set_default_logger(logger);
  });
  spdlog::set_level(spdlog::level::from_str(level));
}

template <class T>
std::vector<T> read_jsonl(const fs::path& path) {
  return io::read_records<T>(path);
}

std::vector<SourceDocument> read_corpus(const fs::path& path) { return read_jsonl<SourceDocument>(path); }

std::string percent(double v) { return fmt::format("{:.1f}%", v); }

// ---------------------------------------------------------------------------
// Shared option groups

struct ModelOptions {
  generation::ModelConfig model;
  generation::BatchPolicy policy;
};

void add_model_options(CLI::App* sub, ModelOptions& m) {
  sub->add_option("--model", m.model.model_name, "Model name sent to the endpoint")->required();
  sub->add_option("--endpoint", m.model.endpoint_url,
                  "Chat-completions base URL, or mock://quiz (and other mock modes) for offline runs")
      ->required();
  sub->add_option("--temperature", m.model.temperature, "Sampling temperature")->capture_default_str();
  sub->add_option("--max-output-tokens", m.model.max_output_tokens, "max_tokens per request")->capture_default_str();
  sub->add_option("--api-key-env", m.model.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  sub->add_option("--timeout", m.model.timeout_seconds, "Request timeout in seconds")->capture_default_str();
  sub->add_option("--system-prompt", m.model.system_prompt, "Optional system message");
  sub->add_option("--concurrency", m.policy.max_concurrency, "Maximum requests in flight")->capture_default_str();
  sub->add_option("--rpm", m.policy.requests_per_minute, "Requests per minute (token bucket)")->capture_default_str();
  sub->add_option("--max-retries", m.policy.max_retries, "Retries for retryable request failures")
      ->capture_default_str();
  sub->add_option("--backoff", m.policy.backoff_base, "Backoff base in seconds (doubles per retry)")
      ->capture_default_str();
}

QuizKind quiz_kind_option(const std::string& s) { return parse_quiz_kind(s); }

// ---------------------------------------------------------------------------
// corpus clean

struct CleanArgs {
  fs::path in;
  fs::path out;
  fs::path rejects;
  std::int64_t min_tokens = 100;
  std::int64_t max_tokens = 3000;
  std::string tokenizer = "unicode-words";
  int fragment_min_tokens = 3;
};

int corpus_clean(const Context& ctx, const CleanArgs& a) {
  corpus::FilterConfig cfg{a.min_tokens, a.max_tokens, corpus::parse_tokenizer_kind(a.tokenizer)};
  cfg.validate();
  if (a.fragment_min_tokens < 0) throw ValidationError("fragment-min-tokens", "must not be negative");
  const auto records = corpus::read_raw_records(a.in);
  const auto ingested = corpus::ingest(records, {a.fragment_min_tokens}, cfg.tokenizer);
  const auto filtered = corpus::filter_docs(ingested.docs, cfg);

  io::write_file_atomic(a.out, io::to_jsonl(filtered.kept));
  const fs::path rejects_path = a.rejects.empty() ? fs::path(a.out).replace_extension(".rejects.json") : a.rejects;
  Json rejected = Json::array();
  std::size_t too_short = 0;
  for (const auto& r : filtered.rejected) {
    rejected.push_back({{"doc_id", r.doc_id}, {"reason", corpus::to_string(r.reason)}, {"token_count", r.token_count}});
    if (r.reason == corpus::RejectReason::TooShort) ++too_short;
  }
  Json failures = Json::array();
  for (const auto& f : ingested.failures) failures.push_back({{"source", f.source}, {"reason", f.reason}});
  const Json report = {{"filter",
                        {{"min_tokens", cfg.min_tokens},
                         {"max_tokens", cfg.max_tokens},
                         {"tokenizer", corpus::to_string(cfg.tokenizer)}}},
                       {"rejected", rejected},
                       {"ingest_failures", failures}};
  io::write_file_atomic(rejects_path, report.dump(2) + "\n");

  const Json summary = {{"records", records.size()},
                        {"ingest_failures", ingested.failures.size()},
                        {"kept", filtered.kept.size()},
                        {"too_short", too_short},
                        {"too_long", filtered.rejected.size() - too_short},
                        {"out", a.out.string()},
                        {"rejects", rejects_path.string()}};
  ctx.report(summary, fmt::format("{} records: {} kept, {} too short, {} too long, {} failed cleaning\n"
                                  "documents -> {}\nrejection report -> {}\n",
                                  records.size(), filtered.kept.size(), too_short,
                                  filtered.rejected.size() - too_short, ingested.failures.size(), a.out.string(),
                                  rejects_path.string()));
  return kOk;
}

// ---------------------------------------------------------------------------
// stats

struct StatsArgs {
  fs::path corpus;
  std::int64_t bucket_width = 250;
  fs::path out;
};

int stats_cmd(const Context& ctx, const StatsArgs& a) {
  const auto docs = read_corpus(a.corpus);
  const auto subjects = corpus::subject_distribution(docs);
  const auto buckets = corpus::token_histogram(docs, a.bucket_width);
  Json js = Json::array();
  std::string text = fmt::format("documents: {}\n\nsubjects:\n", docs.size());
  for (const auto& s : subjects) {
    js.push_back({{"subject", s.subject.slug()}, {"count", s.count}, {"percentage", s.percentage}});
    text += fmt::format("  {:<24} {:>7} {:>7}\n", s.subject.display_name(), s.count, percent(s.percentage));
  }
  Json jb = Json::array();
  text += fmt::format("\ntokens (bucket width {}):\n", a.bucket_width);
  for (const auto& b : buckets) {
    jb.push_back({{"lower", b.lower}, {"upper", b.upper}, {"count", b.count}});
    text += fmt::format("  [{}, {}) {}\n", b.lower, b.upper, b.count);
  }
  std::int64_t total = 0;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    total += docs[i].token_count;
    lo = i == 0 ? docs[i].token_count : std::min(lo, docs[i].token_count);
    hi = std::max(hi, docs[i].token_count);
  }
  const double mean = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
  text += fmt::format("\ntokens: min {} max {} mean {:.1f} total {}\n", lo, hi, mean, total);
  const Json summary = {{"documents", docs.size()},
                        {"subjects", js},
                        {"token_histogram", {{"bucket_width", a.bucket_width}, {"buckets", jb}}},
                        {"tokens", {{"min", lo}, {"max", hi}, {"mean", mean}, {"total", total}}}};
  if (!a.out.empty()) io::write_file_atomic(a.out, summary.dump(2) + "\n");
  ctx.report(summary, text);
  return kOk;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  fs::path corpus;
  fs::path template_dir;
  fs::path out;
  fs::path checkpoint;
  std::string format = "mcq";
  int num_questions = 5;
  int options = 5;
  std::string generated_at;
  ModelOptions m;
};

int generate_cmd(const Context& ctx, const GenerateArgs& a) {
  prompting::RenderParams params{a.num_questions, quiz_kind_option(a.format), a.options};
  params.validate();
  a.m.model.validate();
  a.m.policy.validate();
  const auto templates = a.template_dir.empty() ? prompting::builtin_templates() : prompting::load_templates(a.template_dir);
  const auto docs = read_corpus(a.corpus);
  const fs::path checkpoint =
      a.checkpoint.empty() ? fs::path(a.out).replace_extension(".outcomes.jsonl") : a.checkpoint;
  auto transport = generation::make_transport(a.m.model.endpoint_url);

  generation::BatchOptions options;
  options.checkpoint = checkpoint;
  if (!a.generated_at.empty()) {
    if (!UtcTime::parse(a.generated_at)) {
      throw ValidationError("generated-at", "expected YYYY-MM-DDTHH:MM:SSZ");
    }
    options.timestamp = [ts = a.generated_at] { return ts; };
  }
  options.on_outcome = [](const generation::GenerationOutcome& o) {
    if (!o.ok()) spdlog::warn("{}: {} after {} attempt(s): {}", o.doc_id, generation::to_string(o.status), o.attempts, o.error);
  };
  const auto result = generation::run_batch(docs, templates, params, a.m.model, a.m.policy, *transport, options);

  std::vector<QuizSet> sets;
  for (const auto& o : result.outcomes) {
    if (o.ok()) sets.push_back(*o.quiz_set);
  }
  io::write_file_atomic(a.out, io::to_jsonl(sets));
  const auto& s = result.summary;
  const Json summary = {{"documents", docs.size()},
                        {"ok", s.ok},
                        {"parse_failed", s.parse_failed},
                        {"request_failed", s.request_failed},
                        {"resumed", s.resumed},
                        {"out", a.out.string()},
                        {"checkpoint", checkpoint.string()}};
  ctx.report(summary, fmt::format("{} documents: {} ok ({} from checkpoint), {} parse failed, {} request failed\n"
                                  "quiz sets -> {}\noutcomes -> {}\n",
                                  docs.size(), s.ok, s.resumed, s.parse_failed, s.request_failed, a.out.string(),
                                  checkpoint.string()));
  if (s.request_failed > 0) return kIo;
  if (s.parse_failed > 0) return kValidation;
  return kOk;
}

// ---------------------------------------------------------------------------
// transform mcq-to-saq

struct TransformArgs {
  fs::path in;
  fs::path out;
  fs::path report;
};

int transform_cmd(const Context& ctx, const TransformArgs& a) {
  const auto summary = transform::transform_corpus(a.in, a.out);
  const Json j = transform::to_json(summary);
  if (!a.report.empty()) io::write_file_atomic(a.report, j.dump(2) + "\n");
  std::string text = fmt::format("{} sets / {} items transformed -> {}\n", summary.sets, summary.items, a.out.string());
  for (const auto& e : summary.errors) text += fmt::format("line {}: {}\n", e.line, e.message);
  if (!summary.lint_warnings.empty()) {
    text += fmt::format("{} stems still refer to options (\"aşağıdakilerden hangisi\"); review them\n",
                        summary.lint_warnings.size());
  }
  ctx.report(j, text);
  return summary.errors.empty() ? kOk : kValidation;
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
  fs::path quiz;
  fs::path corpus;
  double gate_min = 0.05;
  std::optional<double> gate_max;
  std::string aggregate = "per-item";
  bool stem_only = false;
  fs::path out;
  fs::path passed_out;
  bool fail_on_gate = false;
};

int score_cmd(const Context& ctx, const ScoreArgs& a) {
  rouge::GateConfig gate{a.gate_min, a.gate_max, rouge::parse_aggregate(a.aggregate), !a.stem_only};
  gate.validate();
  const auto sets = read_jsonl<QuizSet>(a.quiz);
  const auto docs = read_corpus(a.corpus);
  std::unordered_map<std::string, const SourceDocument*> by_id;
  for (const auto& d : docs) by_id.emplace(d.id, &d);

  Json jsets = Json::array();
  std::vector<QuizSet> passed;
  std::size_t items = 0;
  std::size_t items_passed = 0;
  std::size_t sets_passed = 0;
  double f1_sum = 0.0;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    auto it = by_id.find(sets[s].doc_id);
    if (it == by_id.end()) {
      throw ValidationError(fmt::format("line {}: doc_id", s + 1), "not found in the corpus: " + sets[s].doc_id);
    }
    const auto g = rouge::quality_gate(sets[s], *it->second, gate);
    Json jitems = Json::array();
    for (std::size_t i = 0; i < g.scores.items.size(); ++i) {
      jitems.push_back({{"item_id", g.scores.items[i].item_id},
                        {"passed", static_cast<bool>(g.item_passed[i])},
                        {"scores", rouge::to_json(g.scores.items[i].report)}});
      f1_sum += g.scores.items[i].report.rougeL.f1;
      ++items;
      if (g.item_passed[i]) ++items_passed;
    }
    jsets.push_back({{"doc_id", sets[s].doc_id},
                     {"passed", g.set_passed},
                     {"mean_rouge_l_f1", g.scores.mean_rouge_l_f1},
                     {"items", jitems}});
    if (g.set_passed) {
      ++sets_passed;
      passed.push_back(sets[s]);
    }
  }
  const double mean = items ? f1_sum / static_cast<double>(items) : 0.0;
  Json jgate = {{"min_rouge_l", gate.min_rouge_l},
                {"aggregate", rouge::to_string(gate.aggregate)},
                {"include_options", gate.include_options}};
  if (gate.max_rouge_l) jgate["max_rouge_l"] = *gate.max_rouge_l;
  const Json summary = {{"sets", sets.size()},
                        {"sets_passed", sets_passed},
                        {"items", items},
                        {"items_passed", items_passed},
                        {"mean_rouge_l_f1", mean},
                        {"mean_rouge_l_x100", std::round(mean * 10000.0) / 100.0}};
  const Json report = {{"gate", jgate}, {"summary", summary}, {"sets", jsets}};
  if (!a.out.empty()) io::write_file_atomic(a.out, report.dump(2) + "\n");
  if (!a.passed_out.empty()) io::write_file_atomic(a.passed_out, io::to_jsonl(passed));
  ctx.report(summary, fmt::format("{} of {} sets and {} of {} items pass the gate; mean ROUGE-L F1 {:.2f}\n",
                                  sets_passed, sets.size(), items_passed, items, mean * 100.0));
  return a.fail_on_gate && sets_passed < sets.size() ? kValidation : kOk;
}

// ---------------------------------------------------------------------------
// dataset

struct BuildArgs {
  std::vector<fs::path> quiz;
  fs::path corpus;
  fs::path instruction_template;
  fs::path out;
};

int dataset_build(const Context& ctx, const BuildArgs& a) {
  std::vector<QuizSet> sets;
  for (const auto& p : a.quiz) {
    auto more = read_jsonl<QuizSet>(p);
    std::move(more.begin(), more.end(), std::back_inserter(sets));
  }
  const auto docs = read_corpus(a.corpus);
  const std::string tmpl = a.instruction_template.empty() ? dataset::default_instruction_template()
                                                          : io::read_file(a.instruction_template);
  const auto records = dataset::build_records(sets, docs, tmpl);
  std::string content;
  for (const auto& r : records) content += dataset::to_json(r).dump() + "\n";
  io::write_file_atomic(a.out, content);
  ctx.report({{"records", records.size()}, {"out", a.out.string()}},
             fmt::format("{} instruct records -> {}\n", records.size(), a.out.string()));
  return kOk;
}

struct SplitArgs {
  fs::path records;
  std::size_t train = 8000;
  std::size_t eval = 260;
  std::uint64_t seed = 0;
  fs::path out_dir;
};

int dataset_split(const Context& ctx, const SplitArgs& a) {
  const auto records = dataset::read_instruct_records(a.records);
  const auto split = dataset::split(records, a.train, a.eval, a.seed);
  const auto emitted = dataset::emit_jsonl(split, a.out_dir);
  Json summary = split.manifest();
  summary["files"] = {{"train", {{"path", emitted.train.path.string()}, {"sha256", emitted.train.sha256}}},
                      {"eval", {{"path", emitted.eval.path.string()}, {"sha256", emitted.eval.sha256}}},
                      {"manifest", emitted.manifest.string()}};
  ctx.report(summary, fmt::format("train: {} docs / {} records\neval: {} docs / {} records\nunused docs: {}\n"
                                  "written to {}\n",
                                  split.train_manifest.docs, split.train.size(), split.eval_manifest.docs,
                                  split.eval.size(), split.unused_docs, a.out_dir.string()));
  return kOk;
}

struct EmitConfigArgs {
  std::string model = "all";
  fs::path out;
};

int dataset_emit_config(const Context& ctx, const EmitConfigArgs& a) {
  std::vector<dataset::ModelKind> kinds;
  if (a.model == "all") {
    kinds = {dataset::ModelKind::GPT35Turbo, dataset::ModelKind::Llama2Chat7B, dataset::ModelKind::Llama2Chat13B};
  } else {
    kinds = {dataset::parse_model_kind(a.model)};
  }
  Json written = Json::array();
  std::string text;
  for (auto k : kinds) {
    const fs::path path = kinds.size() > 1 ? a.out / fmt::format("{}.json", dataset::to_string(k)) : a.out;
    if (kinds.size() > 1) io::ensure_directory(a.out);
    const auto cfg = dataset::emit_finetune_config(k, path);
    written.push_back({{"path", path.string()}, {"config", dataset::to_json(cfg)}});
    text += fmt::format("{} -> {}\n", dataset::to_string(k), path.string());
  }
  ctx.report({{"written", written}}, text);
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalRunArgs {
  fs::path eval_set;
  std::string label;
  std::string format = "mcq";
  std::string display_name;
  fs::path out;
  ModelOptions m;
};

int eval_run(const Context& ctx, const EvalRunArgs& a) {
  eval::EvalRunConfig cfg{a.m.model, a.m.policy, a.eval_set, quiz_kind_option(a.format), a.label, a.display_name};
  cfg.validate();
  auto transport = generation::make_transport(cfg.model.endpoint_url);
  const auto result = eval::evaluate_model(cfg, *transport);
  io::write_file_atomic(a.out, eval::to_json(result).dump(2) + "\n");
  const auto& m = result.means;
  const Json summary = {{"model", result.model},
                        {"label", result.label},
                        {"format", to_string(result.format)},
                        {"total", result.total},
                        {"scored", result.scored},
                        {"parse_failed", result.parse_failed},
                        {"request_failed", result.request_failed},
                        {"means", rouge::to_json(m)},
                        {"out", a.out.string()}};
  ctx.report(summary, fmt::format("{} {}: {:.2f} / {:.2f} / {:.2f} over {} of {} records "
                                  "({} parse failures, {} request failures)\nresult -> {}\n",
                                  result.model, result.label, m.rouge1.f1 * 100.0, m.rouge2.f1 * 100.0,
                                  m.rougeL.f1 * 100.0, result.scored, result.total, result.parse_failed,
                                  result.request_failed, a.out.string()));
  return kOk;
}

struct EvalReportArgs {
  std::vector<fs::path> in;
  std::string render = "text";
  fs::path out;
};

int eval_report(const Context& ctx, const EvalReportArgs& a) {
  std::vector<eval::EvalResult> results;
  for (const auto& p : a.in) {
    for (auto& r : eval::read_eval_results(p)) results.push_back(std::move(r));
  }
  const auto table = eval::compare_runs(results);
  std::string rendered;
  if (a.render == "text") {
    rendered = eval::render_text(table);
  } else if (a.render == "markdown") {
    rendered = eval::render_markdown(table);
  } else if (a.render == "html") {
    rendered = eval::render_html(table);
  } else {
    rendered = eval::render_json(table).dump(2) + "\n";
  }
  if (!a.out.empty()) io::write_file_atomic(a.out, rendered);
  if (ctx.json) {
    ctx.out << eval::render_json(table).dump(2) << '\n';
  } else {
    ctx.out << rendered;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// review

struct ReviewServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  fs::path quiz;
  fs::path corpus;
  fs::path store = "annotations.jsonl";
  fs::path static_dir;
};

int review_serve(const Context& ctx, const ReviewServeArgs& a) {
  review::ReviewApi api(read_jsonl<QuizSet>(a.quiz), read_corpus(a.corpus), a.store);
  std::optional<fs::path> static_dir;
  if (!a.static_dir.empty()) static_dir = a.static_dir;
  review::ReviewServer server(api, static_dir);
  const int port = server.bind(a.host, a.port);
  ctx.err << fmt::format("serving {} items on http://{}:{} (store {})\n", api.item_count(), a.host, port,
                         a.store.string())
          << std::flush;
  server.listen();
  return kOk;
}

struct ReviewSampleArgs {
  fs::path quiz;
  fs::path corpus;
  std::size_t n = 260;
  std::uint64_t seed = 0;
  bool stratify = false;
  fs::path out;
};

int review_sample(const Context& ctx, const ReviewSampleArgs& a) {
  const auto sets = read_jsonl<QuizSet>(a.quiz);
  const auto docs = a.corpus.empty() ? std::vector<SourceDocument>{} : read_corpus(a.corpus);
  if (a.stratify && a.corpus.empty()) throw ValidationError("corpus", "--stratify needs --corpus for subjects");
  const auto batch = eval::sample_for_review(sets, docs, a.n, a.seed, a.stratify);
  io::write_file_atomic(a.out, io::to_jsonl(batch));
  std::size_t items = 0;
  for (const auto& s : batch) items += s.items.size();
  ctx.report({{"items", items}, {"sets", batch.size()}, {"seed", a.seed}, {"out", a.out.string()}},
             fmt::format("{} items from {} documents -> {}\n", items, batch.size(), a.out.string()));
  return kOk;
}

struct ReviewAggregateArgs {
  fs::path store;
};

int review_aggregate(const Context& ctx, const ReviewAggregateArgs& a) {
  std::vector<Annotation> log;
  for (const auto& line : io::read_jsonl_lines(a.store)) {
    try {
      log.push_back(deserialize<Annotation>(line.text));
    } catch (const ValidationError& e) {
      spdlog::warn("{}:{}: skipping unreadable annotation ({})", a.store.string(), line.line_no, e.what());
    }
  }
  const auto d = eval::aggregate_ratings(log);
  std::string text = fmt::format("{} effective ratings\n", d.total);
  for (auto r : kAllRatings) {
    text += fmt::format("  RATING-{} {:>6} {:>7}\n", to_char(r), d.count(r), percent(d.percentage(r)));
  }
  for (const auto& [id, per] : d.per_annotator) {
    text += fmt::format("  {}:", id);
    for (auto r : kAllRatings) text += fmt::format(" {}={}", to_char(r), per.count(r));
    text += "\n";
  }
  ctx.report(eval::to_json(d), text);
  return kOk;
}

// ---------------------------------------------------------------------------
// mock serve

struct MockServeArgs {
  std::string host = "127.0.0.1";
  int port = 8089;
  std::string mode = "mock://quiz";
};

int mock_serve(const Context& ctx, const MockServeArgs& a) {
  generation::MockEndpoint endpoint(a.mode.rfind("mock://", 0) == 0 ? a.mode : "mock://" + a.mode);
  generation::MockServer server(endpoint);
  const int port = server.bind(a.host, a.port);
  ctx.err << fmt::format("mock endpoint ({}) on http://{}:{}/v1\n", endpoint.mode(), a.host, port) << std::flush;
  server.listen();
  return kOk;
}

int report_error(const Context& ctx, const Error& e) {
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
    ctx.err << "error: validation failed\n";
    for (const auto& x : v->violations()) ctx.err << "  " << (x.path.empty() ? "$" : x.path) << ": " << x.message << '\n';
  } else {
    ctx.err << "error: " << e.what() << '\n';
  }
  return e.category() == Error::Category::Io ? kIo : kValidation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  CLI::App app{"Quiz dataset pipeline: clean, generate, score, transform, split, evaluate, review", "quizforge"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "TOML-style config file; flags on the command line win");
  app.require_subcommand(1);
  app.fallthrough();
  std::string log_level = "warn";
  app.add_flag("--json", ctx.json, "Print a machine-readable JSON summary");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
      ->capture_default_str();

  std::function<int()> action;
  auto bind = [&](CLI::App* sub, std::function<int()> fn) { sub->callback([&action, fn] { action = fn; }); };

  // corpus clean
  auto* corpus_app = app.add_subcommand("corpus", "Corpus intake")->require_subcommand(1);
  CleanArgs clean;
  auto* clean_app = corpus_app->add_subcommand("clean", "Clean raw records and filter by token count");
  clean_app->add_option("--in", clean.in, "Raw records: JSONL file or directory of .jsonl/.json/.txt")
      ->required()
      ->check(CLI::ExistingPath);
  clean_app->add_option("--out", clean.out, "SourceDocument JSONL to write")->required();
  clean_app->add_option("--rejects", clean.rejects, "Rejection report (default <out>.rejects.json)");
  clean_app->add_option("--min-tokens", clean.min_tokens, "Inclusive lower bound")->capture_default_str();
  clean_app->add_option("--max-tokens", clean.max_tokens, "Inclusive upper bound")->capture_default_str();
  clean_app->add_option("--tokenizer", clean.tokenizer, "unicode-words or whitespace")
      ->check(CLI::IsMember({"unicode-words", "whitespace"}))
      ->capture_default_str();
  clean_app->add_option("--fragment-min-tokens", clean.fragment_min_tokens,
                        "Drop lines with fewer tokens from multi-line records")
      ->capture_default_str();
  bind(clean_app, [&] { return corpus_clean(ctx, clean); });

  // stats
  StatsArgs stats;
  auto* stats_app = app.add_subcommand("stats", "Subject distribution and token histogram of a corpus");
  stats_app->add_option("--corpus", stats.corpus, "SourceDocument JSONL")->required()->check(CLI::ExistingFile);
  stats_app->add_option("--bucket-width", stats.bucket_width, "Histogram bucket width in tokens")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  stats_app->add_option("--out", stats.out, "Also write the JSON summary here");
  bind(stats_app, [&] { return stats_cmd(ctx, stats); });

  // generate
  GenerateArgs gen;
  auto* gen_app = app.add_subcommand("generate", "Generate quiz sets for every document");
  gen_app->add_option("--corpus", gen.corpus, "SourceDocument JSONL")->required()->check(CLI::ExistingFile);
  gen_app->add_option("--template-dir", gen.template_dir, "Directory of <subject>.tmpl files (default: built-in)")
      ->check(CLI::ExistingDirectory);
  gen_app->add_option("--format", gen.format, "mcq or saq")->check(CLI::IsMember({"mcq", "saq"}))->capture_default_str();
  gen_app->add_option("--num-questions", gen.num_questions, "Questions per document")->capture_default_str();
  gen_app->add_option("--options", gen.options, "Options per MCQ question (2-5)")->capture_default_str();
  gen_app->add_option("--out", gen.out, "QuizSet JSONL of successful documents")->required();
  gen_app->add_option("--checkpoint", gen.checkpoint, "Outcomes log (default <out>.outcomes.jsonl)");
  gen_app->add_option("--generated-at", gen.generated_at, "Fixed provenance timestamp (YYYY-MM-DDTHH:MM:SSZ)");
  add_model_options(gen_app, gen.m);
  bind(gen_app, [&] { return generate_cmd(ctx, gen); });

  // transform
  auto* transform_app = app.add_subcommand("transform", "Derive datasets")->require_subcommand(1);
  TransformArgs tr;
  auto* m2s = transform_app->add_subcommand("mcq-to-saq", "Keep each MCQ's correct option as a short answer");
  m2s->add_option("--in", tr.in, "MCQ QuizSet JSONL")->required()->check(CLI::ExistingFile);
  m2s->add_option("--out", tr.out, "SAQ QuizSet JSONL")->required();
  m2s->add_option("--report", tr.report, "Write the summary (errors, lint warnings) as JSON");
  bind(m2s, [&] { return transform_cmd(ctx, tr); });

  // score
  ScoreArgs sc;
  auto* score_app = app.add_subcommand("score", "ROUGE-L faithfulness gate against the source documents");
  score_app->add_option("--quiz", sc.quiz, "QuizSet JSONL")->required()->check(CLI::ExistingFile);
  score_app->add_option("--corpus", sc.corpus, "SourceDocument JSONL")->required()->check(CLI::ExistingFile);
  score_app->add_option("--gate-min", sc.gate_min, "Minimum ROUGE-L F1 in [0, 1]")->capture_default_str();
  score_app->add_option("--gate-max", sc.gate_max, "Optional maximum ROUGE-L F1 (answer leakage)");
  score_app->add_option("--aggregate", sc.aggregate, "per-item or mean-over-set")
      ->check(CLI::IsMember({"per-item", "mean-over-set"}))
      ->capture_default_str();
  score_app->add_flag("--stem-only", sc.stem_only, "Score MCQ stems without their options");
  score_app->add_option("--out", sc.out, "Per-item report JSON");
  score_app->add_option("--passed-out", sc.passed_out, "QuizSet JSONL of sets that pass");
  score_app->add_flag("--fail-on-gate", sc.fail_on_gate, "Exit 1 when any set fails the gate");
  bind(score_app, [&] { return score_cmd(ctx, sc); });

  // dataset
  auto* ds_app = app.add_subcommand("dataset", "Instruct datasets and fine-tuning configs")->require_subcommand(1);
  BuildArgs build;
  auto* build_app = ds_app->add_subcommand("build", "Turn quiz sets into instruct records");
  build_app->add_option("--quiz", build.quiz, "QuizSet JSONL (repeatable)")->required()->check(CLI::ExistingFile);
  build_app->add_option("--corpus", build.corpus, "SourceDocument JSONL")->required()->check(CLI::ExistingFile);
  build_app->add_option("--instruction-template", build.instruction_template,
                        "Instruction template (placeholders title, num_questions, format)")
      ->check(CLI::ExistingFile);
  build_app->add_option("--out", build.out, "Instruct record JSONL")->required();
  bind(build_app, [&] { return dataset_build(ctx, build); });

  SplitArgs split;
  auto* split_app = ds_app->add_subcommand("split", "Document-level train/eval split; writes train/eval/manifest");
  split_app->add_option("--records", split.records, "Instruct record JSONL")->required()->check(CLI::ExistingFile);
  split_app->add_option("--train", split.train, "Training documents")->capture_default_str();
  split_app->add_option("--eval", split.eval, "Evaluation documents")->capture_default_str();
  split_app->add_option("--seed", split.seed, "Shuffle seed")->required();
  split_app->add_option("--out-dir", split.out_dir, "Output directory")->required();
  bind(split_app, [&] { return dataset_split(ctx, split); });

  EmitConfigArgs emit;
  auto* emit_app = ds_app->add_subcommand("emit-config", "Write fine-tuning configuration files");
  emit_app->add_option("--model", emit.model, "gpt-3.5-turbo, llama-2-7b-chat, llama-2-13b-chat or all")
      ->capture_default_str();
  emit_app->add_option("--out", emit.out, "Output file (a directory for --model all)")->required();
  bind(emit_app, [&] { return dataset_emit_config(ctx, emit); });

  // eval
  auto* eval_app = app.add_subcommand("eval", "Model evaluation")->require_subcommand(1);
  EvalRunArgs er;
  auto* run_app = eval_app->add_subcommand("run", "Score a model endpoint on the eval split");
  run_app->add_option("--eval-set", er.eval_set, "eval.jsonl from dataset split")->required()->check(CLI::ExistingFile);
  run_app->add_option("--label", er.label, "Run label, e.g. base or finetuned")->required();
  run_app->add_option("--format", er.format, "mcq or saq records to evaluate")
      ->check(CLI::IsMember({"mcq", "saq"}))
      ->capture_default_str();
  run_app->add_option("--display-name", er.display_name, "Row name in reports (default: --model)");
  run_app->add_option("--out", er.out, "EvalResult JSON")->required();
  add_model_options(run_app, er.m);
  bind(run_app, [&] { return eval_run(ctx, er); });

  EvalReportArgs rep;
  auto* rep_app = eval_app->add_subcommand("report", "Compare eval runs in the ROUGE table layout");
  rep_app->add_option("--in", rep.in, "EvalResult JSON files (.jsonl: one result per line)")->required()->check(CLI::ExistingFile);
  rep_app->add_option("--render", rep.render, "text, markdown, html or json")
      ->check(CLI::IsMember({"text", "markdown", "html", "json"}))
      ->capture_default_str();
  rep_app->add_option("--out", rep.out, "Also write the rendering here");
  bind(rep_app, [&] { return eval_report(ctx, rep); });

  // review
  auto* review_app = app.add_subcommand("review", "Human rating workflow")->require_subcommand(1);
  ReviewServeArgs rs;
  auto* serve_app = review_app->add_subcommand("serve", "Serve the annotation API");
  serve_app->add_option("--host", rs.host, "Bind address")->capture_default_str();
  serve_app->add_option("--port", rs.port, "Port (0 picks a free one)")->capture_default_str();
  serve_app->add_option("--quiz", rs.quiz, "QuizSet JSONL to review")->required()->check(CLI::ExistingFile);
  serve_app->add_option("--corpus", rs.corpus, "SourceDocument JSONL")->required()->check(CLI::ExistingFile);
  serve_app->add_option("--store", rs.store, "Append-only annotation log")->capture_default_str();
  serve_app->add_option("--static-dir", rs.static_dir, "Built review UI to serve under /")
      ->check(CLI::ExistingDirectory);
  bind(serve_app, [&] { return review_serve(ctx, rs); });

  ReviewSampleArgs rsm;
  auto* sample_app = review_app->add_subcommand("sample", "Draw a seeded review sample of quiz items");
  sample_app->add_option("--quiz", rsm.quiz, "QuizSet JSONL")->required()->check(CLI::ExistingFile);
  sample_app->add_option("--corpus", rsm.corpus, "SourceDocument JSONL (needed for --stratify)")
      ->check(CLI::ExistingFile);
  sample_app->add_option("--n", rsm.n, "Items to draw")->capture_default_str();
  sample_app->add_option("--seed", rsm.seed, "Sampling seed")->required();
  sample_app->add_flag("--stratify", rsm.stratify, "Spread the sample evenly over subjects");
  sample_app->add_option("--out", rsm.out, "QuizSet JSONL holding the sampled items")->required();
  bind(sample_app, [&] { return review_sample(ctx, rsm); });

  ReviewAggregateArgs ra;
  auto* agg_app = review_app->add_subcommand("aggregate", "Rating distribution of an annotation log");
  agg_app->add_option("--store", ra.store, "Annotation log")->required()->check(CLI::ExistingFile);
  bind(agg_app, [&] { return review_aggregate(ctx, ra); });

  // mock
  auto* mock_app = app.add_subcommand("mock", "Offline chat-completions endpoint")->require_subcommand(1);
  MockServeArgs ms;
  auto* mock_serve_app = mock_app->add_subcommand("serve", "Serve a deterministic mock endpoint over HTTP");
  mock_serve_app->add_option("--host", ms.host, "Bind address")->capture_default_str();
  mock_serve_app->add_option("--port", ms.port, "Port (0 picks a free one)")->capture_default_str();
  mock_serve_app->add_option("--mode", ms.mode, "mock:// URL selecting the behaviour")->capture_default_str();
  bind(mock_serve_app, [&] { return mock_serve(ctx, ms); });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (const CLI::App* sub = &app; sub;) {
      const auto chosen = sub->get_subcommands();
      if (chosen.empty()) break;
      failing = sub = chosen.front();
    }
    err << failing->help();
    return kValidation;
  }

  // Subcommand help is raised while parsing that subcommand; anything else
  // lands here with an action bound.
  if (!action) {
    err << app.help();
    return kValidation;
  }
  setup_logging(log_level);
  try {
    return action();
  } catch (const Error& e) {
    return report_error(ctx, e);
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace quizforge::cli
