#include "quizforge/stats.hpp"

#include <cstdint>
#include <numeric>

namespace quizforge::stats {

std::vector<double> rounded_percentages(const std::vector<std::size_t>& counts, int decimals) {
  std::vector<double> out(counts.size(), 0.0);
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) return out;

  std::int64_t scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const std::int64_t units = 100 * scale;

  // Integer arithmetic: exact share_i = counts_i * units / total.
  const auto t = static_cast<std::int64_t>(total);
  std::vector<std::int64_t> rounded(counts.size());
  std::vector<std::int64_t> nums(counts.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    nums[i] = static_cast<std::int64_t>(counts[i]) * units;
    rounded[i] = (2 * nums[i] + t) / (2 * t);
    assigned += rounded[i];
  }
  // Excess of the rounded value over the exact one, scaled by total.
  auto excess = [&](std::size_t i) { return rounded[i] * t - nums[i]; };
  while (assigned > units + 1 || assigned < units - 1) {
    const std::int64_t dir = assigned > units ? 1 : -1;
    std::size_t pick = 0;
    for (std::size_t i = 1; i < counts.size(); ++i) {
      if (dir * excess(i) > dir * excess(pick)) pick = i;
    }
    rounded[pick] -= dir;
    assigned -= dir;
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = static_cast<double>(rounded[i]) / static_cast<double>(scale);
  }
  return out;
}

}  // namespace quizforge::stats
