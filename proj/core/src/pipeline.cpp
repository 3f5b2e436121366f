#include "abft_guard/pipeline.hpp"

#include <optional>
#include <string>

namespace abft_guard {

namespace {

template <Element T>
struct PendingCheck {
  ChecksumVector<T> activation_checksum;
  const ChecksumVector<T>* weight_checksum;
  T output_sum;
  std::int64_t k;
  std::size_t layer;
};

template <Element T>
Matrix<T> apply_activation(const Matrix<T>& c, Activation activation, ElementType mode) {
  Matrix<T> out = c;
  if (activation == Activation::relu) {
    for (T& v : out.values()) {
      if (v < T{}) v = T{};
    }
  }
  quantize(out, mode);
  return out;
}

}  // namespace

template <Element T>
PipelineResult<T> run_protected_pipeline(const Matrix<T>& input, std::span<const ProtectedLayer<T>> layers,
                                         Activation activation, ElementType mode,
                                         std::span<const PipelineFault<T>> faults) {
  check_mode<T>(mode);
  for (const auto& f : faults) {
    if (f.layer >= layers.size()) throw InvalidFaultError("pipeline fault targets a missing layer");
  }

  PipelineResult<T> result;
  Matrix<T> act = input;
  quantize(act, mode);
  ChecksumVector<T> act_checksum = column_checksum(act);
  std::optional<PendingCheck<T>> pending;

  auto resolve = [&](const PendingCheck<T>& p) {
    const T lhs = checksum_dot(p.activation_checksum, *p.weight_checksum);
    result.verdicts.push_back(compare(lhs, p.output_sum, mode, p.k));
    result.trace.push_back({PipelineEventKind::verify, p.layer});
  };

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (act.cols() != layer.weights().rows()) {
      throw ShapeMismatchError("layer " + std::to_string(l) + " expects " + std::to_string(layer.weights().rows()) +
                               " input features, got " + std::to_string(act.cols()));
    }
    Matrix<T> c = multiply(act, layer.weights());
    result.trace.push_back({PipelineEventKind::gemm, l});

    // The previous layer's verification runs alongside this layer.
    if (pending) {
      resolve(*pending);
      pending.reset();
    }

    for (const auto& f : faults) {
      if (f.layer != l) continue;
      if (f.row >= c.rows() || f.col >= c.cols()) throw InvalidFaultError("pipeline fault outside layer output");
      c(f.row, f.col) = Arith<T>::add(c(f.row, f.col), f.delta);
    }

    const T out_sum = output_summation(c);
    act = apply_activation(c, activation, mode);
    ChecksumVector<T> next_checksum = column_checksum(act);
    pending = PendingCheck<T>{std::move(act_checksum), &layer.weight_checksum(), out_sum,
                              static_cast<std::int64_t>(layer.weights().rows()), l};
    act_checksum = std::move(next_checksum);
  }
  if (pending) resolve(*pending);

  result.output = std::move(act);
  return result;
}

template PipelineResult<std::int64_t> run_protected_pipeline(const Matrix<std::int64_t>&,
                                                             std::span<const ProtectedLayer<std::int64_t>>,
                                                             Activation, ElementType,
                                                             std::span<const PipelineFault<std::int64_t>>);
template PipelineResult<float> run_protected_pipeline(const Matrix<float>&, std::span<const ProtectedLayer<float>>,
                                                      Activation, ElementType, std::span<const PipelineFault<float>>);

}  // namespace abft_guard
