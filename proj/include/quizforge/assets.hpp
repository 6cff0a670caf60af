#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace quizforge::assets {

/// A file from the repository's assets/ directory, compiled into the library.
struct Asset {
  std::string_view path;  // relative to assets/, forward slashes
  std::string_view content;
};

const std::vector<Asset>& all();
std::optional<std::string_view> find(std::string_view path);

}  // namespace quizforge::assets
