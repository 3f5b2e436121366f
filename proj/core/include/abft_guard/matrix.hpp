#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "abft_guard/errors.hpp"
#include "abft_guard/shapes.hpp"

namespace abft_guard {

/// Element types the simulator runs on: 64-bit integers for exact mode,
/// binary32 for both floating-point modes (binary16 inputs are pre-rounded and
/// accumulate in binary32).
template <typename T>
concept Element = std::is_same_v<T, std::int64_t> || std::is_same_v<T, float>;

template <Element T>
inline constexpr bool is_exact_v = std::is_same_v<T, std::int64_t>;

/// Dense row-major matrix.
template <Element T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ShapeMismatchError("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  const T* row(std::size_t r) const noexcept { return data_.data() + r * cols_; }
  T* row(std::size_t r) noexcept { return data_.data() + r * cols_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Read-only strided window into a Matrix.
template <Element T>
struct MatrixView {
  const T* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t stride = 0;

  MatrixView() = default;
  MatrixView(const T* d, std::size_t r, std::size_t c, std::size_t s) : data(d), rows(r), cols(c), stride(s) {}
  MatrixView(const Matrix<T>& m) : data(m.values().data()), rows(m.rows()), cols(m.cols()), stride(m.cols()) {}

  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data[r * stride + c]; }

  MatrixView block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    return {data + r0 * stride + c0, nr, nc, stride};
  }
};

/// Nearest binary16 value (round-to-nearest-even), returned widened.
float round_to_half(float value);

/// Scalar arithmetic of the active numeric mode. Integer operations throw
/// OverflowError instead of wrapping.
template <Element T>
struct Arith;

template <>
struct Arith<std::int64_t> {
  static std::int64_t add(std::int64_t a, std::int64_t b) {
    std::int64_t out;
    if (__builtin_add_overflow(a, b, &out)) throw OverflowError("exact-int addition overflow");
    return out;
  }
  static std::int64_t mul(std::int64_t a, std::int64_t b) {
    std::int64_t out;
    if (__builtin_mul_overflow(a, b, &out)) throw OverflowError("exact-int multiplication overflow");
    return out;
  }
  static std::int64_t fma(std::int64_t acc, std::int64_t a, std::int64_t b) { return add(acc, mul(a, b)); }
};

template <>
struct Arith<float> {
  static float add(float a, float b) { return a + b; }
  static float mul(float a, float b) { return a * b; }
  static float fma(float acc, float a, float b) { return acc + a * b; }
};

/// Throws ValidationError when `mode` does not fit element type T
/// (int64 <-> exact-int, float <-> binary16/binary32).
template <Element T>
void check_mode(ElementType mode) {
  const bool ok = is_exact_v<T> ? mode == ElementType::exact_int : mode != ElementType::exact_int;
  if (!ok) {
    throw ValidationError("dtype", std::string("element type ") + std::string(to_string(mode)) +
                                       " does not match the matrix storage type");
  }
}

/// Rounds every element to binary16 when `mode` is binary16; no-op otherwise.
void quantize(Matrix<float>& m, ElementType mode);
inline void quantize(Matrix<std::int64_t>&, ElementType) {}

/// Relative factor r of the comparison tolerance: 2^-10 for binary16,
/// 2^-23 for binary32, 0 for exact-int.
double tolerance_factor(ElementType mode);

/// tau = r * K * max(|reference|, 1). `reference` is the checksum-side value
/// of a comparison, which a fault in the output cannot move.
double comparison_tolerance(ElementType mode, std::int64_t k, double reference);

/// Outcome of one checksum comparison. lhs is the redundant (checksum) side,
/// rhs the value recomputed from the produced output.
template <Element T>
struct Verdict {
  bool detected = false;
  T lhs{};
  T rhs{};
  double tolerance_used = 0.0;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// detected = |lhs - rhs| > tolerance; exact mode compares for equality.
template <Element T>
Verdict<T> compare(T lhs, T rhs, ElementType mode, std::int64_t k) {
  Verdict<T> v{false, lhs, rhs, 0.0};
  if constexpr (is_exact_v<T>) {
    v.detected = lhs != rhs;
  } else {
    v.tolerance_used = comparison_tolerance(mode, k, static_cast<double>(lhs));
    const double diff = std::fabs(static_cast<double>(lhs) - static_cast<double>(rhs));
    // NaN/inf on either side counts as detected.
    v.detected = !(diff <= v.tolerance_used);
  }
  return v;
}

/// Reference product used by the pipeline; accumulation follows Arith<T>.
template <Element T>
Matrix<T> multiply(const Matrix<T>& a, const Matrix<T>& b);

extern template Matrix<std::int64_t> multiply(const Matrix<std::int64_t>&, const Matrix<std::int64_t>&);
extern template Matrix<float> multiply(const Matrix<float>&, const Matrix<float>&);

}  // namespace abft_guard
