#pragma once

#include <cstddef>
#include <vector>

namespace quizforge::stats {

/// Percentages of `counts` rounded to nearest at `decimals` places. When the
/// sum drifts more than one last-place unit from 100, the values rounded
/// furthest in the drifting direction are nudged back until it does not.
/// All zeros when the total is zero.
std::vector<double> rounded_percentages(const std::vector<std::size_t>& counts, int decimals = 1);

}  // namespace quizforge::stats
