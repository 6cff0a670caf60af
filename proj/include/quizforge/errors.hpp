#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace quizforge {

/// Base of every error the library throws. `category()` drives CLI exit
/// codes: validation problems map to 1, I/O and network problems to 2.
class Error : public std::runtime_error {
 public:
  enum class Category { Validation, Io };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

struct Violation {
  std::string path;
  std::string message;

  bool operator==(const Violation&) const = default;
};

/// Carries every invariant violation found, each with a field path such as
/// `items[2].options[1].text`.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  ValidationError(std::string path, std::string message);

  const std::vector<Violation>& violations() const noexcept { return violations_; }
  bool has_path(std::string_view path) const;

 private:
  std::vector<Violation> violations_;
};

class IoError : public Error {
 public:
  IoError(std::filesystem::path path, const std::string& what)
      : Error(Category::Io, path.string() + ": " + what), path_(std::move(path)) {}

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace quizforge
