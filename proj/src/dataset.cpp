#include "quizforge/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "quizforge/assets.hpp"
#include "quizforge/io.hpp"
#include "quizforge/prompting.hpp"
#include "quizforge/quiz_parser.hpp"
#include "quizforge/stats.hpp"
#include "quizforge/text.hpp"

namespace quizforge::dataset {

std::string InstructRecord::record_id() const { return meta.doc_id + "/" + std::string(to_string(meta.format)); }

std::vector<Violation> validate(const InstructRecord& r, const std::string& path) {
  const std::string p = path.empty() ? "" : path + ".";
  std::vector<Violation> v;
  if (text::is_blank(r.instruction)) v.push_back({p + "instruction", "must not be empty"});
  if (text::is_blank(r.input)) v.push_back({p + "input", "must not be empty"});
  if (text::is_blank(r.output)) v.push_back({p + "output", "must not be empty"});
  if (r.meta.doc_id.empty()) v.push_back({p + "meta.doc_id", "must not be empty"});
  if (r.meta.subject.empty()) v.push_back({p + "meta.subject", "must not be empty"});
  return v;
}

Json to_json(const InstructRecord& r) {
  return {{"instruction", text::nfc(r.instruction)},
          {"input", text::nfc(r.input)},
          {"output", text::nfc(r.output)},
          {"meta", {{"doc_id", r.meta.doc_id}, {"subject", r.meta.subject}, {"format", to_string(r.meta.format)}}}};
}

InstructRecord record_from_json(const Json& j) {
  std::vector<Violation> v;
  auto str = [&](const Json& obj, const char* key, const std::string& path) -> std::string {
    if (!obj.is_object() || !obj.contains(key) || !obj[key].is_string()) {
      v.push_back({path, "expected a string"});
      return {};
    }
    return obj[key].get<std::string>();
  };
  InstructRecord r;
  if (!j.is_object()) throw ValidationError("$", "expected an object");
  r.instruction = str(j, "instruction", "instruction");
  r.input = str(j, "input", "input");
  r.output = str(j, "output", "output");
  const Json meta = j.contains("meta") ? j["meta"] : Json();
  r.meta.doc_id = str(meta, "doc_id", "meta.doc_id");
  r.meta.subject = str(meta, "subject", "meta.subject");
  const auto format = str(meta, "format", "meta.format");
  if (!format.empty()) {
    try {
      r.meta.format = parse_quiz_kind(format);
    } catch (const ValidationError&) {
      v.push_back({"meta.format", fmt::format("unknown format '{}'", format)});
    }
  }
  if (v.empty()) v = validate(r);
  if (!v.empty()) throw ValidationError(std::move(v));
  return r;
}

std::vector<InstructRecord> read_instruct_records(const std::filesystem::path& path) {
  std::vector<InstructRecord> out;
  std::vector<Violation> problems;
  for (const auto& line : io::read_jsonl_lines(path)) {
    try {
      out.push_back(record_from_json(Json::parse(line.text)));
    } catch (const Json::parse_error& e) {
      problems.push_back({fmt::format("line {}: $", line.line_no), e.what()});
    } catch (const ValidationError& e) {
      for (const auto& viol : e.violations()) {
        problems.push_back({fmt::format("line {}: {}", line.line_no, viol.path), viol.message});
      }
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return out;
}

std::string default_instruction_template() { return std::string(*assets::find("instruction.tmpl")); }

std::vector<InstructRecord> build_records(std::span<const QuizSet> sets, std::span<const SourceDocument> corpus,
                                          const std::string& instruction_template) {
  std::unordered_map<std::string, const SourceDocument*> by_id;
  for (const auto& d : corpus) by_id.emplace(d.id, &d);
  std::vector<InstructRecord> out;
  out.reserve(sets.size());
  for (const auto& qs : sets) {
    auto it = by_id.find(qs.doc_id);
    if (it == by_id.end()) throw UnresolvedDoc(qs.doc_id);
    const SourceDocument& doc = *it->second;
    const int options = qs.format == QuizKind::Mcq && !qs.items.empty()
                            ? static_cast<int>(qs.items.front().options.size())
                            : 5;
    const std::map<std::string, std::string, std::less<>> values = {
        {"title", doc.title},
        {"num_questions", std::to_string(qs.items.size())},
        {"format", prompting::format_phrase(qs.format, options)},
    };
    InstructRecord r;
    r.instruction = text::trim(prompting::substitute(instruction_template, values, "instruction template"));
    r.input = doc.body;
    r.output = format_quiz(qs, QuizLayout::Lettered);
    r.meta = {doc.id, doc.subject.slug(), qs.format};
    out.push_back(std::move(r));
  }
  return out;
}

std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == std::numeric_limits<std::uint64_t>::max()) return rng();
  const std::uint64_t range = bound + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) return x % range;
  }
}

namespace {

SideManifest side_manifest(const std::vector<InstructRecord>& records) {
  std::map<std::string, std::string> doc_subject;
  for (const auto& r : records) doc_subject.emplace(r.meta.doc_id, r.meta.subject);
  std::map<std::string, std::size_t> counts;
  for (const auto& [doc, subject] : doc_subject) ++counts[subject];
  std::vector<SubjectCount> subjects;
  for (const auto& [subject, count] : counts) subjects.push_back({subject, count, 0.0});
  std::stable_sort(subjects.begin(), subjects.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  std::vector<std::size_t> raw;
  for (const auto& s : subjects) raw.push_back(s.count);
  const auto pct = stats::rounded_percentages(raw, 1);
  for (std::size_t i = 0; i < subjects.size(); ++i) subjects[i].percentage = pct[i];
  return {doc_subject.size(), records.size(), std::move(subjects)};
}

Json to_json(const SideManifest& m) {
  Json subjects = Json::array();
  for (const auto& s : m.subjects) {
    subjects.push_back({{"subject", s.subject}, {"count", s.count}, {"percentage", s.percentage}});
  }
  return {{"docs", m.docs}, {"records", m.records}, {"subjects", subjects}};
}

}  // namespace

Json DatasetSplit::manifest() const {
  return {{"seed", seed},
          {"shuffle", "mt19937_64 fisher-yates over sorted doc ids; eval takes the first block"},
          {"train", to_json(train_manifest)},
          {"eval", to_json(eval_manifest)},
          {"unused_docs", unused_docs}};
}

DatasetSplit split(std::span<const InstructRecord> records, std::size_t train_docs, std::size_t eval_docs,
                   std::uint64_t seed) {
  std::set<std::string> id_set;
  for (const auto& r : records) id_set.insert(r.meta.doc_id);
  std::vector<std::string> ids(id_set.begin(), id_set.end());
  if (train_docs + eval_docs > ids.size()) {
    throw InsufficientRecords(fmt::format("requested {} train + {} eval documents but only {} are available",
                                          train_docs, eval_docs, ids.size()));
  }
  seeded_shuffle(ids, seed);
  std::unordered_map<std::string, int> side;  // 0 eval, 1 train
  for (std::size_t i = 0; i < eval_docs + train_docs; ++i) side.emplace(ids[i], i < eval_docs ? 0 : 1);

  DatasetSplit out;
  out.seed = seed;
  for (const auto& r : records) {
    auto it = side.find(r.meta.doc_id);
    if (it == side.end()) continue;
    (it->second == 0 ? out.eval : out.train).push_back(r);
  }
  out.train_manifest = side_manifest(out.train);
  out.eval_manifest = side_manifest(out.eval);
  out.unused_docs = ids.size() - train_docs - eval_docs;
  return out;
}

EmitResult emit_jsonl(const DatasetSplit& split, const std::filesystem::path& out_dir) {
  io::ensure_directory(out_dir);
  auto write = [&](const std::vector<InstructRecord>& records, const char* name) {
    std::string content;
    for (const auto& r : records) {
      content += to_json(r).dump();
      content += '\n';
    }
    EmittedFile f{out_dir / name, records.size(), io::sha256_hex(content)};
    io::write_file_atomic(f.path, content);
    return f;
  };
  EmitResult result;
  result.train = write(split.train, "train.jsonl");
  result.eval = write(split.eval, "eval.jsonl");
  Json manifest = split.manifest();
  for (const auto* f : {&result.train, &result.eval}) {
    manifest["files"][f->path.filename().string()] = {{"lines", f->lines}, {"sha256", f->sha256}};
  }
  result.manifest = out_dir / "manifest.json";
  io::write_file_atomic(result.manifest, manifest.dump(2) + "\n");
  return result;
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::GPT35Turbo: return "gpt-3.5-turbo";
    case ModelKind::Llama2Chat7B: return "llama-2-7b-chat";
    case ModelKind::Llama2Chat13B: return "llama-2-13b-chat";
  }
  return "?";
}

std::string_view to_string(FinetuneMethod m) { return m == FinetuneMethod::PEFT ? "peft" : "full-service-api"; }

ModelKind parse_model_kind(std::string_view s) {
  const std::string key = text::turkish_lower(s);
  for (auto k : {ModelKind::GPT35Turbo, ModelKind::Llama2Chat7B, ModelKind::Llama2Chat13B}) {
    if (key == to_string(k)) return k;
  }
  if (key == "gpt35turbo" || key == "gpt-3.5" || key == "gpt35") return ModelKind::GPT35Turbo;
  if (key == "llama2chat7b" || key == "llama2-7b" || key == "llama-2-7b") return ModelKind::Llama2Chat7B;
  if (key == "llama2chat13b" || key == "llama2-13b" || key == "llama-2-13b") return ModelKind::Llama2Chat13B;
  throw ValidationError("model_kind", fmt::format("unknown model kind '{}'", s));
}

FinetuneMethod parse_finetune_method(std::string_view s) {
  if (s == "peft") return FinetuneMethod::PEFT;
  if (s == "full-service-api") return FinetuneMethod::FullServiceAPI;
  throw ValidationError("method", fmt::format("unknown method '{}'", s));
}

std::vector<Violation> validate(const FinetuneConfig& c) {
  std::vector<Violation> v;
  if (c.batch_size <= 0) v.push_back({"batch_size", "must be positive"});
  if (!(c.learning_rate > 0.0)) v.push_back({"learning_rate", "must be positive"});
  if (c.epochs <= 0) v.push_back({"epochs", "must be positive"});
  if (c.method == FinetuneMethod::PEFT) {
    if (!c.peft_r || *c.peft_r <= 0) v.push_back({"peft_r", "required (positive) for peft"});
    if (!c.peft_alpha || *c.peft_alpha <= 0) v.push_back({"peft_alpha", "required (positive) for peft"});
  } else {
    if (c.peft_r) v.push_back({"peft_r", "not allowed for full-service-api"});
    if (c.peft_alpha) v.push_back({"peft_alpha", "not allowed for full-service-api"});
  }
  return v;
}

FinetuneConfig finetune_config_for(ModelKind kind) {
  if (kind == ModelKind::GPT35Turbo) return {kind, FinetuneMethod::FullServiceAPI, 16, 0.001, 3, {}, {}};
  return {kind, FinetuneMethod::PEFT, 64, 0.0001, 3, 16, 32};
}

Json to_json(const FinetuneConfig& c) {
  Json j = {{"model_kind", to_string(c.model_kind)},
            {"method", to_string(c.method)},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"epochs", c.epochs}};
  if (c.peft_r) j["peft_r"] = *c.peft_r;
  if (c.peft_alpha) j["peft_alpha"] = *c.peft_alpha;
  return j;
}

FinetuneConfig finetune_config_from_json(const Json& j) {
  FinetuneConfig c;
  try {
    c.model_kind = parse_model_kind(j.at("model_kind").get<std::string>());
    c.method = parse_finetune_method(j.at("method").get<std::string>());
    c.batch_size = j.at("batch_size").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.epochs = j.at("epochs").get<int>();
    if (j.contains("peft_r")) c.peft_r = j["peft_r"].get<int>();
    if (j.contains("peft_alpha")) c.peft_alpha = j["peft_alpha"].get<int>();
  } catch (const Json::exception& e) {
    throw ValidationError("$", e.what());
  }
  if (auto v = validate(c); !v.empty()) throw ValidationError(std::move(v));
  return c;
}

FinetuneConfig emit_finetune_config(ModelKind kind, const std::filesystem::path& out) {
  const auto cfg = finetune_config_for(kind);
  io::write_file_atomic(out, to_json(cfg).dump(2) + "\n");
  return cfg;
}

}  // namespace quizforge::dataset
