#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "abft_guard/checksum.hpp"

namespace abft_guard {

enum class Activation { identity, relu };

/// A linear layer whose weight checksum is built once, at construction, and
/// reused for every request.
template <Element T>
class ProtectedLayer {
 public:
  explicit ProtectedLayer(Matrix<T> weights)
      : weights_(std::move(weights)), weight_checksum_(offline_weight_checksum(weights_)) {}

  const Matrix<T>& weights() const noexcept { return weights_; }
  const ChecksumVector<T>& weight_checksum() const noexcept { return weight_checksum_; }

 private:
  Matrix<T> weights_;
  ChecksumVector<T> weight_checksum_;
};

/// Corrupts C[row][col] of layer `layer` right after its GEMM, before the
/// activation is applied.
template <Element T>
struct PipelineFault {
  std::size_t layer = 0;
  std::size_t row = 0;
  std::size_t col = 0;
  T delta{};
};

enum class PipelineEventKind { gemm, verify };

struct PipelineEvent {
  PipelineEventKind kind;
  std::size_t layer;

  friend bool operator==(const PipelineEvent&, const PipelineEvent&) = default;
};

template <Element T>
struct PipelineResult {
  Matrix<T> output;                  // activated output of the last layer
  std::vector<Verdict<T>> verdicts;  // one per layer, in layer order
  std::vector<PipelineEvent> trace;  // execution order of GEMMs and verifications
};

/// Runs a chain of global-ABFT-protected layers. Per layer: GEMM, fused
/// output summation, activation, fused next-layer activation checksum; the
/// checksum comparison is deferred until the following layer's GEMM has been
/// issued. In binary16 mode activations are stored (and checksummed) as
/// binary16.
template <Element T>
PipelineResult<T> run_protected_pipeline(const Matrix<T>& input, std::span<const ProtectedLayer<T>> layers,
                                         Activation activation, ElementType mode,
                                         std::span<const PipelineFault<T>> faults = {});

extern template PipelineResult<std::int64_t> run_protected_pipeline(const Matrix<std::int64_t>&,
                                                                    std::span<const ProtectedLayer<std::int64_t>>,
                                                                    Activation, ElementType,
                                                                    std::span<const PipelineFault<std::int64_t>>);
extern template PipelineResult<float> run_protected_pipeline(const Matrix<float>&,
                                                             std::span<const ProtectedLayer<float>>, Activation,
                                                             ElementType, std::span<const PipelineFault<float>>);

}  // namespace abft_guard
