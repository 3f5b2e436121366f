#include "abft_guard/matrix.hpp"

#include <Eigen/Core>
#include <algorithm>

namespace abft_guard {

float round_to_half(float value) { return static_cast<float>(Eigen::half(value)); }

void quantize(Matrix<float>& m, ElementType mode) {
  if (mode != ElementType::binary16) return;
  for (float& v : m.values()) v = round_to_half(v);
}

double tolerance_factor(ElementType mode) {
  switch (mode) {
    case ElementType::exact_int: return 0.0;
    case ElementType::binary16: return 0x1p-10;
    case ElementType::binary32: return 0x1p-23;
  }
  return 0.0;
}

double comparison_tolerance(ElementType mode, std::int64_t k, double reference) {
  return tolerance_factor(mode) * static_cast<double>(k) * std::max(std::fabs(reference), 1.0);
}

template <Element T>
Matrix<T> multiply(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeMismatchError("cannot multiply " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                             " by " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      T acc{};
      for (std::size_t p = 0; p < a.cols(); ++p) acc = Arith<T>::fma(acc, a(i, p), b(p, j));
      c(i, j) = acc;
    }
  }
  return c;
}

template Matrix<std::int64_t> multiply(const Matrix<std::int64_t>&, const Matrix<std::int64_t>&);
template Matrix<float> multiply(const Matrix<float>&, const Matrix<float>&);

}  // namespace abft_guard
