#pragma once

// Annotation HTTP API used by the review UI.
//
//   GET  /api/items/next?annotator=ID   lowest-indexed item ID has not rated
//   GET  /api/items/{item_id}           one item with its source context
//   POST /api/ratings                   {"item_id","annotator_id","rating","comment"?}
//   GET  /api/progress[?annotator=ID]
//   GET  /api/rubric
//
// Everything else under / is static content.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "quizforge/eval.hpp"
#include "quizforge/model.hpp"

namespace quizforge::review {

struct ApiResponse {
  int status = 200;
  Json body;
};

/// Socket-free request handling; ReviewServer adapts it to HTTP.
class ReviewApi {
 public:
  /// Throws ValidationError when a set's document is missing from the
  /// corpus or item ids repeat, IoError when the store cannot be opened.
  ReviewApi(std::vector<QuizSet> sets, std::vector<SourceDocument> corpus, const std::filesystem::path& store_path,
            std::function<UtcTime()> clock = UtcTime::now);

  ApiResponse next_item(const std::string& annotator) const;
  ApiResponse item(const std::string& item_id) const;
  /// Timestamps are assigned here and strictly increase across posts.
  ApiResponse post_rating(std::string_view body);
  ApiResponse progress(const std::optional<std::string>& annotator) const;
  ApiResponse rubric() const;

  std::size_t item_count() const noexcept { return items_.size(); }
  const eval::AnnotationStore& store() const noexcept { return store_; }

 private:
  struct Entry {
    const QuizItem* item;
    const QuizSet* set;
    const SourceDocument* doc;
  };

  Json view(std::size_t index) const;
  Json progress_json(const eval::AnnotationStore::Snapshot& snap, const std::optional<std::string>& annotator) const;

  std::vector<QuizSet> sets_;
  std::vector<SourceDocument> corpus_;
  std::vector<Entry> items_;
  std::unordered_map<std::string, std::size_t> index_of_;
  eval::AnnotationStore store_;
  std::function<UtcTime()> clock_;
  std::mutex write_mu_;
  std::optional<UtcTime> last_timestamp_;
};

class ReviewServer {
 public:
  /// `static_dir` replaces the built-in placeholder page when given.
  ReviewServer(ReviewApi& api, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  /// Binds (port 0 picks a free port) and returns the bound port. Throws
  /// IoError when the address is unavailable.
  int bind(const std::string& host, int port);
  /// Serves until stop(); bind() first.
  void listen();
  /// bind() + listen() on a background thread.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace quizforge::review
