#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "quizforge/model.hpp"

namespace quizforge::io {

struct JsonlLine {
  std::size_t line_no = 0;  // 1-based
  std::string text;
};

/// Non-blank lines of a JSONL file. Throws IoError when unreadable.
std::vector<JsonlLine> read_jsonl_lines(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename so readers never observe a
/// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Creates the directory (and parents) or throws IoError naming it.
void ensure_directory(const std::filesystem::path& dir);

std::string sha256_hex(std::string_view data);

/// Reads every line of a JSONL file as T, throwing ValidationError whose
/// paths are prefixed with `line N`.
template <class T>
std::vector<T> read_records(const std::filesystem::path& path) {
  std::vector<T> out;
  std::vector<Violation> problems;
  for (const auto& line : read_jsonl_lines(path)) {
    try {
      out.push_back(deserialize<T>(line.text));
    } catch (const ValidationError& e) {
      for (const auto& v : e.violations()) {
        problems.push_back({"line " + std::to_string(line.line_no) + ": " + v.path, v.message});
      }
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return out;
}

template <class T>
std::string to_jsonl(const std::vector<T>& records) {
  std::string out;
  for (const auto& r : records) {
    out += serialize(r);
    out += '\n';
  }
  return out;
}

/// Append-only line writer; every append is flushed and synced before it
/// returns. Thread-safe.
class AppendLog {
 public:
  explicit AppendLog(std::filesystem::path path);
  ~AppendLog();
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;

  void append(std::string_view line);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::mutex mu_;
};

}  // namespace quizforge::io
