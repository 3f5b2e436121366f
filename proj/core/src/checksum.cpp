#include "abft_guard/checksum.hpp"

#include <string>

namespace abft_guard {

template <Element T>
ChecksumVector<T> column_checksum(const Matrix<T>& a) {
  ChecksumVector<T> out{ChecksumOrientation::column, std::vector<T>(a.cols(), T{})};
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const T* row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) out.values[j] = Arith<T>::add(out.values[j], row[j]);
  }
  return out;
}

template <Element T>
ChecksumVector<T> row_checksum(const Matrix<T>& b) {
  ChecksumVector<T> out{ChecksumOrientation::row, std::vector<T>(b.rows(), T{})};
  for (std::size_t i = 0; i < b.rows(); ++i) {
    const T* row = b.row(i);
    T acc{};
    for (std::size_t j = 0; j < b.cols(); ++j) acc = Arith<T>::add(acc, row[j]);
    out.values[i] = acc;
  }
  return out;
}

template <Element T>
T checksum_dot(const ChecksumVector<T>& column, const ChecksumVector<T>& row) {
  if (column.values.size() != row.values.size()) {
    throw ShapeMismatchError("checksum length mismatch: " + std::to_string(column.values.size()) + " vs " +
                             std::to_string(row.values.size()));
  }
  T acc{};
  for (std::size_t p = 0; p < column.values.size(); ++p) acc = Arith<T>::fma(acc, column.values[p], row.values[p]);
  return acc;
}

template <Element T>
T output_summation(const Matrix<T>& c) {
  T acc{};
  for (const T v : c.values()) acc = Arith<T>::add(acc, v);
  return acc;
}

template <Element T>
Verdict<T> global_abft_check(const Matrix<T>& a, const Matrix<T>& b, const Matrix<T>& c, ElementType mode) {
  check_mode<T>(mode);
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols()) {
    throw ShapeMismatchError("global ABFT check on unconformable A, B, C");
  }
  const T lhs = checksum_dot(column_checksum(a), row_checksum(b));
  const T rhs = output_summation(c);
  return compare(lhs, rhs, mode, static_cast<std::int64_t>(a.cols()));
}

template <Element T>
ChecksumVector<T> offline_weight_checksum(const Matrix<T>& b) {
  return row_checksum(b);
}

#define ABFT_GUARD_CHECKSUM_INSTANTIATE(T)                                                                        \
  template ChecksumVector<T> column_checksum(const Matrix<T>&);                                                   \
  template ChecksumVector<T> row_checksum(const Matrix<T>&);                                                      \
  template T checksum_dot(const ChecksumVector<T>&, const ChecksumVector<T>&);                                    \
  template T output_summation(const Matrix<T>&);                                                                  \
  template Verdict<T> global_abft_check(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&, ElementType);       \
  template ChecksumVector<T> offline_weight_checksum(const Matrix<T>&);

ABFT_GUARD_CHECKSUM_INSTANTIATE(std::int64_t)
ABFT_GUARD_CHECKSUM_INSTANTIATE(float)

}  // namespace abft_guard
