#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string_view>

#include "abft_guard/shapes.hpp"

namespace abft_guard {

/// Threadblock / warp / thread decomposition of C. Each thread owns a
/// thread_m x thread_n tile of C and walks K in chunks of k_step, loading a
/// thread_m x k_step slice of A and a k_step x thread_n slice of B per step.
struct TilingConfig {
  std::int64_t tb_m = 128;
  std::int64_t tb_n = 128;
  std::int64_t warp_m = 64;
  std::int64_t warp_n = 64;
  std::int64_t thread_m = 16;
  std::int64_t thread_n = 8;
  std::int64_t k_step = 2;

  friend bool operator==(const TilingConfig&, const TilingConfig&) = default;
};

/// Throws InvalidTilingError on non-positive sizes, non-nesting tiles or an
/// odd thread_m (each MMA consumes two consecutive rows of the A slice).
void validate(const TilingConfig& tiling);

/// Rounds m, n up to the threadblock tile and k up to k_step.
GemmShape pad_to_tiling(const GemmShape& shape, const TilingConfig& tiling);

enum class Scheme {
  unprotected,
  global_abft,
  thread_one_sided,
  thread_two_sided,
  thread_replication_full,
  thread_replication_single_acc,
};

inline constexpr Scheme kAllSchemes[] = {Scheme::unprotected,      Scheme::global_abft,
                                         Scheme::thread_one_sided, Scheme::thread_two_sided,
                                         Scheme::thread_replication_full, Scheme::thread_replication_single_acc};

std::string_view to_string(Scheme scheme);

/// Accepts the canonical names plus short aliases ("global", "one-sided",
/// "two-sided", "replication", "replication-single").
Scheme scheme_from_string(std::string_view name);

bool is_thread_level(Scheme scheme);

/// Width of the shared accumulator used by single-accumulation replication.
inline constexpr std::int64_t kSingleAccumulatorWidth = 4;

struct OpCounts {
  std::uint64_t base_mma_count = 0;
  std::uint64_t redundant_mma_count = 0;
  /// Checksum generation adds (per-step thread-level work, or kernel-level
  /// activation checksum + dot product + output summation for global ABFT).
  std::uint64_t checksum_op_count = 0;
  /// End-of-tile summations and comparisons.
  std::uint64_t verification_op_count = 0;
  /// Elements of A and B loaded by the base thread-tile loop.
  std::uint64_t operand_load_count = 0;

  OpCounts& operator+=(const OpCounts& o) {
    base_mma_count += o.base_mma_count;
    redundant_mma_count += o.redundant_mma_count;
    checksum_op_count += o.checksum_op_count;
    verification_op_count += o.verification_op_count;
    operand_load_count += o.operand_load_count;
    return *this;
  }
  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

/// Extra work one thread performs per step along K.
struct PerStepCounts {
  std::uint64_t redundant_mma = 0;
  std::uint64_t checksum_ops = 0;

  friend bool operator==(const PerStepCounts&, const PerStepCounts&) = default;
};

/// Replication: Mt*Nt/2 MMAs, no checksum ops. Two-sided: 1 MMA,
/// k_step*(Mt+Nt) ops. One-sided: Mt/2 MMAs, k_step*Nt ops.
PerStepCounts per_step_counts(Scheme scheme, const TilingConfig& tiling);

/// Closed-form totals over T = (m/Mt)(n/Nt) threads and S = k/k_step steps.
/// Requires m % Mt == 0, n % Nt == 0 and k % k_step == 0.
OpCounts count_redundant_ops(Scheme scheme, const TilingConfig& tiling, const GemmShape& gemm);

/// Position of one thread in the hierarchy. Ordering is lexicographic, which
/// is also the order the executor visits threads in.
struct ThreadCoord {
  std::int64_t block_row = 0;
  std::int64_t block_col = 0;
  std::int64_t warp_row = 0;
  std::int64_t warp_col = 0;
  std::int64_t thread_row = 0;
  std::int64_t thread_col = 0;

  std::int64_t origin_row(const TilingConfig& t) const {
    return block_row * t.tb_m + warp_row * t.warp_m + thread_row * t.thread_m;
  }
  std::int64_t origin_col(const TilingConfig& t) const {
    return block_col * t.tb_n + warp_col * t.warp_n + thread_col * t.thread_n;
  }

  friend auto operator<=>(const ThreadCoord&, const ThreadCoord&) = default;
};

/// Thread that owns output element (row, col).
ThreadCoord owning_thread(std::int64_t row, std::int64_t col, const TilingConfig& tiling);

}  // namespace abft_guard
