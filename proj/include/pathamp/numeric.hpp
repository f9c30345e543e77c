#pragma once

#include <cstddef>
#include <span>

namespace pathamp {

// Pairwise (cascade) summation: O(log n) rounding growth and a fixed
// reduction tree, so the result does not depend on how callers chunk work.
template <typename T>
T pairwise_sum(std::span<const T> values) {
  constexpr std::size_t kBlock = 8;
  if (values.size() <= kBlock) {
    T acc{};
    for (const T& v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

// Trapezoid rule on a uniform grid.
double trapezoid(std::span<const double> values, double spacing);

}  // namespace pathamp
