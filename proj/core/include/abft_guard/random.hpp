#pragma once

#include <cstdint>
#include <random>

#include "abft_guard/matrix.hpp"
#include "abft_guard/tiling.hpp"

namespace abft_guard {

/// Exact mode: integers uniform in [-value_range, value_range].
/// Floating modes: uniform in [-1, 1], rounded to binary16 when `mode` is
/// binary16.
template <Element T>
Matrix<T> random_matrix(std::size_t rows, std::size_t cols, ElementType mode, std::mt19937_64& rng,
                        std::int64_t value_range = 8) {
  Matrix<T> m(rows, cols);
  if constexpr (is_exact_v<T>) {
    std::uniform_int_distribution<std::int64_t> dist(-value_range, value_range);
    for (auto& v : m.values()) v = dist(rng);
  } else {
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    for (auto& v : m.values()) v = dist(rng);
    quantize(m, mode);
  }
  return m;
}

/// Random valid tiling with small tiles: thread_m in {2,4,8,16},
/// thread_n in {1,2,4,8}, warp and threadblock multipliers in {1,2},
/// k_step in {1,2,4}.
TilingConfig random_tiling(std::mt19937_64& rng);

}  // namespace abft_guard
