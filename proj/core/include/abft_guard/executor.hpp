#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "abft_guard/matrix.hpp"
#include "abft_guard/tiling.hpp"

namespace abft_guard {

/// Fault applied to C[row][col] after accumulation, before any check reads it.
struct OutputSite {
  std::int64_t row = 0;
  std::int64_t col = 0;

  friend bool operator==(const OutputSite&, const OutputSite&) = default;
};

/// Fault in one MMA of one thread: the contribution of step `step` to local
/// output (local_row, local_col) is perturbed. Only the base accumulation sees
/// it; redundant copies execute cleanly.
struct MmaSite {
  ThreadCoord thread;
  std::int64_t step = 0;
  std::int64_t local_row = 0;
  std::int64_t local_col = 0;

  friend bool operator==(const MmaSite&, const MmaSite&) = default;
};

enum class FaultSiteKind { output_element, thread_mma };

template <Element T>
struct FaultSpec {
  std::variant<OutputSite, MmaSite> site;
  T delta{};

  static FaultSpec at_output(std::int64_t row, std::int64_t col, T delta) { return {OutputSite{row, col}, delta}; }
  static FaultSpec at_mma(ThreadCoord thread, std::int64_t step, std::int64_t local_row, std::int64_t local_col,
                          T delta) {
    return {MmaSite{thread, step, local_row, local_col}, delta};
  }

  /// Uniformly random site that targets a real (non-padding) output cell of
  /// `shape` under `tiling`.
  static FaultSpec random(FaultSiteKind kind, const GemmShape& shape, const TilingConfig& tiling, T delta,
                          std::mt19937_64& rng);
};

/// Output element a fault lands on, in unpadded coordinates.
template <Element T>
std::pair<std::int64_t, std::int64_t> fault_target(const FaultSpec<T>& fault, const TilingConfig& tiling);

/// Per-thread perturbation; step < 0 means "after accumulation".
template <Element T>
struct LocalFault {
  std::int64_t step = -1;
  std::int64_t row = 0;
  std::int64_t col = 0;
  T delta{};
};

template <Element T>
struct ThreadTileResult {
  Matrix<T> ct;
  std::optional<Verdict<T>> verdict;  // empty for unprotected execution
  OpCounts counts;
};

/// Runs one thread's sub-GEMM (At: Mt x K, Bt: K x Nt) under `scheme`.
/// Global ABFT and unprotected run the bare loop. Every checksum input is
/// taken from the per-step operand chunks the base loop already loaded.
template <Element T>
ThreadTileResult<T> run_thread_tile(MatrixView<T> at, MatrixView<T> bt, std::int64_t k_step, Scheme scheme,
                                    ElementType mode, std::span<const LocalFault<T>> faults = {});

/// Checksums Bt only and multiplies all of At by it: Mt/2 extra MMAs per step.
template <Element T>
ThreadTileResult<T> thread_tile_one_sided(const Matrix<T>& at, const Matrix<T>& bt, const TilingConfig& tiling,
                                          ElementType mode, std::span<const LocalFault<T>> faults = {});

/// Checksums both At and Bt: one extra MMA per step.
template <Element T>
ThreadTileResult<T> thread_tile_two_sided(const Matrix<T>& at, const Matrix<T>& bt, const TilingConfig& tiling,
                                          ElementType mode, std::span<const LocalFault<T>> faults = {});

enum class ReplicationVariant { full, single_accumulator };

template <Element T>
ThreadTileResult<T> thread_tile_replication(const Matrix<T>& at, const Matrix<T>& bt, const TilingConfig& tiling,
                                            ReplicationVariant variant, ElementType mode,
                                            std::span<const LocalFault<T>> faults = {});

template <Element T>
struct DomainVerdict {
  std::optional<ThreadCoord> thread;  // empty for the kernel-wide global check
  Verdict<T> verdict;
};

template <Element T>
struct ExecutionReport {
  Matrix<T> output;                          // m x n, unpadded
  std::vector<DomainVerdict<T>> verdicts;    // sorted by thread coordinates
  bool detected = false;                     // OR over verdicts
  OpCounts op_counts;
  GemmShape shape;                           // requested problem
  GemmShape executed_shape;                  // zero-padded to the tiling
};

/// Simulates the tiled GEMM under `scheme` with the given faults injected.
/// Inputs are zero-padded to the tiling; faults may not target padding.
template <Element T>
ExecutionReport<T> execute(const Matrix<T>& a, const Matrix<T>& b, const TilingConfig& tiling, Scheme scheme,
                           std::span<const FaultSpec<T>> faults, ElementType mode);

/// Threads whose verdict fired.
template <Element T>
std::vector<ThreadCoord> firing_threads(const ExecutionReport<T>& report);

#define ABFT_GUARD_EXECUTOR_EXTERN(T)                                                                             \
  extern template struct FaultSpec<T>;                                                                            \
  extern template std::pair<std::int64_t, std::int64_t> fault_target(const FaultSpec<T>&, const TilingConfig&);   \
  extern template ThreadTileResult<T> run_thread_tile(MatrixView<T>, MatrixView<T>, std::int64_t, Scheme,         \
                                                      ElementType, std::span<const LocalFault<T>>);               \
  extern template ThreadTileResult<T> thread_tile_one_sided(const Matrix<T>&, const Matrix<T>&,                   \
                                                            const TilingConfig&, ElementType,                     \
                                                            std::span<const LocalFault<T>>);                      \
  extern template ThreadTileResult<T> thread_tile_two_sided(const Matrix<T>&, const Matrix<T>&,                   \
                                                            const TilingConfig&, ElementType,                     \
                                                            std::span<const LocalFault<T>>);                      \
  extern template ThreadTileResult<T> thread_tile_replication(const Matrix<T>&, const Matrix<T>&,                 \
                                                              const TilingConfig&, ReplicationVariant,            \
                                                              ElementType, std::span<const LocalFault<T>>);       \
  extern template ExecutionReport<T> execute(const Matrix<T>&, const Matrix<T>&, const TilingConfig&, Scheme,     \
                                             std::span<const FaultSpec<T>>, ElementType);                         \
  extern template std::vector<ThreadCoord> firing_threads(const ExecutionReport<T>&);

ABFT_GUARD_EXECUTOR_EXTERN(std::int64_t)
ABFT_GUARD_EXECUTOR_EXTERN(float)
#undef ABFT_GUARD_EXECUTOR_EXTERN

}  // namespace abft_guard
