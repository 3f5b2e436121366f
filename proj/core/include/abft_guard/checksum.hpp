#pragma once

#include <cstdint>
#include <vector>

#include "abft_guard/matrix.hpp"

namespace abft_guard {

enum class ChecksumOrientation {
  column,  // 1 x K, per-column sums of A (activation checksum)
  row,     // K x 1, per-row sums of B (weight checksum)
};

template <Element T>
struct ChecksumVector {
  ChecksumOrientation orientation = ChecksumOrientation::column;
  std::vector<T> values;

  friend bool operator==(const ChecksumVector&, const ChecksumVector&) = default;
};

/// Entry j is the sum of column j of `a`.
template <Element T>
ChecksumVector<T> column_checksum(const Matrix<T>& a);

/// Entry i is the sum of row i of `b`.
template <Element T>
ChecksumVector<T> row_checksum(const Matrix<T>& b);

/// Throws ShapeMismatchError on a length mismatch.
template <Element T>
T checksum_dot(const ChecksumVector<T>& column, const ChecksumVector<T>& row);

template <Element T>
T output_summation(const Matrix<T>& c);

/// Kernel-wide check: colck(A) . rowck(B) against the sum of C.
/// Tolerance follows `mode` (zero in exact mode).
template <Element T>
Verdict<T> global_abft_check(const Matrix<T>& a, const Matrix<T>& b, const Matrix<T>& c, ElementType mode);

/// Weight checksum built once ahead of inference. Same values as
/// row_checksum(b).
template <Element T>
ChecksumVector<T> offline_weight_checksum(const Matrix<T>& b);

#define ABFT_GUARD_CHECKSUM_EXTERN(T)                                                                      \
  extern template ChecksumVector<T> column_checksum(const Matrix<T>&);                                     \
  extern template ChecksumVector<T> row_checksum(const Matrix<T>&);                                        \
  extern template T checksum_dot(const ChecksumVector<T>&, const ChecksumVector<T>&);                      \
  extern template T output_summation(const Matrix<T>&);                                                    \
  extern template Verdict<T> global_abft_check(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&,       \
                                               ElementType);                                               \
  extern template ChecksumVector<T> offline_weight_checksum(const Matrix<T>&);

ABFT_GUARD_CHECKSUM_EXTERN(std::int64_t)
ABFT_GUARD_CHECKSUM_EXTERN(float)
#undef ABFT_GUARD_CHECKSUM_EXTERN

}  // namespace abft_guard
