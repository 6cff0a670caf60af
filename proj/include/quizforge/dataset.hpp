#pragma once

// Instruct records, the document-level train/eval split, dataset files and
// fine-tuning configuration artifacts.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "quizforge/errors.hpp"
#include "quizforge/model.hpp"

namespace quizforge::dataset {

struct RecordMeta {
  std::string doc_id;
  std::string subject;  // slug
  QuizKind format = QuizKind::Mcq;

  bool operator==(const RecordMeta&) const = default;
};

struct InstructRecord {
  std::string instruction;
  std::string input;
  std::string output;
  RecordMeta meta;

  /// `doc_id/format`, unique per record produced by build_records.
  std::string record_id() const;
  bool operator==(const InstructRecord&) const = default;
};

std::vector<Violation> validate(const InstructRecord& r, const std::string& path = "");
Json to_json(const InstructRecord& r);
InstructRecord record_from_json(const Json& j);
std::vector<InstructRecord> read_instruct_records(const std::filesystem::path& path);

class UnresolvedDoc : public Error {
 public:
  explicit UnresolvedDoc(const std::string& doc_id)
      : Error(Category::Validation, "quiz set refers to unknown document " + doc_id), doc_id_(doc_id) {}
  const std::string& doc_id() const noexcept { return doc_id_; }

 private:
  std::string doc_id_;
};

/// Shipped instruction template (placeholders: title, num_questions, format).
std::string default_instruction_template();

/// One record per quiz set; `output` is the lettered layout with answer
/// lines, `input` the document body.
std::vector<InstructRecord> build_records(std::span<const QuizSet> sets, std::span<const SourceDocument> corpus,
                                          const std::string& instruction_template);

class InsufficientRecords : public Error {
 public:
  explicit InsufficientRecords(const std::string& what) : Error(Category::Validation, what) {}
};

/// Uniform integer in [0, bound] by rejection sampling on 64-bit draws.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound);

/// Fisher-Yates with mt19937_64 and bounded_draw; identical on every
/// platform for a given seed.
template <class T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded_draw(rng, i - 1));
    std::swap(v[i - 1], v[j]);
  }
}

struct SubjectCount {
  std::string subject;
  std::size_t count = 0;
  double percentage = 0.0;
};

struct SideManifest {
  std::size_t docs = 0;
  std::size_t records = 0;
  std::vector<SubjectCount> subjects;  // by document
};

struct DatasetSplit {
  std::vector<InstructRecord> train;
  std::vector<InstructRecord> eval;
  std::uint64_t seed = 0;
  SideManifest train_manifest;
  SideManifest eval_manifest;
  std::size_t unused_docs = 0;

  Json manifest() const;
};

/// Sorted distinct doc ids are shuffled with `seed`; the first `eval_docs`
/// go to eval and the next `train_docs` to train. Sizes count documents and
/// every record follows its document. Records keep their input order.
DatasetSplit split(std::span<const InstructRecord> records, std::size_t train_docs, std::size_t eval_docs,
                   std::uint64_t seed);

struct EmittedFile {
  std::filesystem::path path;
  std::size_t lines = 0;
  std::string sha256;
};

struct EmitResult {
  EmittedFile train;
  EmittedFile eval;
  std::filesystem::path manifest;
};

/// Writes train.jsonl, eval.jsonl and manifest.json (with checksums).
EmitResult emit_jsonl(const DatasetSplit& split, const std::filesystem::path& out_dir);

enum class ModelKind { GPT35Turbo, Llama2Chat7B, Llama2Chat13B };
enum class FinetuneMethod { FullServiceAPI, PEFT };

std::string_view to_string(ModelKind k);
std::string_view to_string(FinetuneMethod m);
ModelKind parse_model_kind(std::string_view s);
FinetuneMethod parse_finetune_method(std::string_view s);

struct FinetuneConfig {
  ModelKind model_kind = ModelKind::GPT35Turbo;
  FinetuneMethod method = FinetuneMethod::FullServiceAPI;
  int batch_size = 0;
  double learning_rate = 0.0;
  int epochs = 0;
  std::optional<int> peft_r;
  std::optional<int> peft_alpha;

  bool operator==(const FinetuneConfig&) const = default;
};

std::vector<Violation> validate(const FinetuneConfig& c);
FinetuneConfig finetune_config_for(ModelKind kind);
Json to_json(const FinetuneConfig& c);
FinetuneConfig finetune_config_from_json(const Json& j);

/// Writes the configuration for `kind` as JSON and returns it.
FinetuneConfig emit_finetune_config(ModelKind kind, const std::filesystem::path& out);

}  // namespace quizforge::dataset
