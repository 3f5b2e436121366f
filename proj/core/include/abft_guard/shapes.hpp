#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "abft_guard/errors.hpp"

namespace abft_guard {

/// A linear layer expressed as C[m x n] = A[m x k] * B[k x n]. A holds
/// activations, B holds weights.
struct GemmShape {
  std::int64_t m = 1;
  std::int64_t n = 1;
  std::int64_t k = 1;

  friend bool operator==(const GemmShape&, const GemmShape&) = default;
};

/// Throws InvalidLayerError unless m, n, k >= 1.
void validate(const GemmShape& shape);

struct ConvParams {
  std::int64_t out_channels = 1;
  std::int64_t kernel_h = 1;
  std::int64_t kernel_w = 1;
  std::int64_t stride_h = 1;
  std::int64_t stride_w = 1;
  std::int64_t pad_h = 0;
  std::int64_t pad_w = 0;

  friend bool operator==(const ConvParams&, const ConvParams&) = default;
};

struct FcParams {
  std::int64_t out_features = 1;

  friend bool operator==(const FcParams&, const FcParams&) = default;
};

enum class LayerKind { conv, fully_connected };

struct LayerSpec {
  std::variant<ConvParams, FcParams> params;

  LayerKind kind() const noexcept {
    return std::holds_alternative<ConvParams>(params) ? LayerKind::conv : LayerKind::fully_connected;
  }

  static LayerSpec conv(std::int64_t out_channels, std::int64_t kernel, std::int64_t stride = 1,
                        std::int64_t pad = 0) {
    return LayerSpec{ConvParams{out_channels, kernel, kernel, stride, stride, pad, pad}};
  }
  static LayerSpec fc(std::int64_t out_features) { return LayerSpec{FcParams{out_features}}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ModelSpec {
  std::string name;
  std::int64_t batch = 1;
  std::int64_t input_h = 1;
  std::int64_t input_w = 1;
  std::int64_t input_c = 1;
  std::vector<LayerSpec> layers;
};

/// Activation tensor between layers (per sample).
struct ActivationShape {
  std::int64_t h = 1;
  std::int64_t w = 1;
  std::int64_t c = 1;

  friend bool operator==(const ActivationShape&, const ActivationShape&) = default;
};

enum class ElementType { exact_int, binary16, binary32 };

std::string_view to_string(ElementType type);
ElementType element_type_from_string(std::string_view name);

/// Element encoding used for byte accounting and for the numeric mode of the
/// simulator. exact_int carries a configurable byte width so FP16 traffic can
/// be analysed with exact arithmetic.
struct DType {
  ElementType tag = ElementType::binary16;
  int bytes_per_element = 2;

  static DType exact_int(int bytes_per_element = 2);
  static DType binary16() { return {ElementType::binary16, 2}; }
  static DType binary32() { return {ElementType::binary32, 4}; }

  friend bool operator==(const DType&, const DType&) = default;
};

/// Separate verification kernel launch cost used when a profile omits it.
inline constexpr double kDefaultVerificationLaunchLatency = 5e-6;

/// Scalar-ALU throughput as a fraction of tensor throughput when a profile
/// omits it.
inline constexpr double kDefaultAluFraction = 1.0 / 8.0;

struct DeviceProfile {
  std::string name;
  double tensor_throughput = 0.0;  // FLOP/s
  double alu_throughput = 0.0;     // FLOP/s
  double memory_bandwidth = 0.0;   // bytes/s
  double verification_launch_latency = kDefaultVerificationLaunchLatency;  // s
  bool alu_defaulted = false;

  /// Builds a profile from datasheet units. A non-positive `alu_tflops`
  /// selects the tensor/8 default and sets `alu_defaulted`.
  static DeviceProfile from_datasheet(std::string name, double tensor_tflops, double mem_bw_gbs,
                                      double alu_tflops = 0.0,
                                      double verification_launch_us = kDefaultVerificationLaunchLatency * 1e6);
};

/// Throws ValidationError unless every rate is positive.
void validate(const DeviceProfile& device);

enum class PaddingPolicy { none, multiple_of_8 };

std::string_view to_string(PaddingPolicy policy);

/// floor((in + 2*pad - kernel) / stride) + 1 per spatial axis.
std::pair<std::int64_t, std::int64_t> conv_output_shape(std::int64_t in_h, std::int64_t in_w, const LayerSpec& layer);

/// im2col mapping for convolutions, direct mapping for fully-connected layers.
/// FC layers consume the flattened activation (h*w*c features).
GemmShape layer_to_gemm(std::int64_t batch, std::int64_t in_h, std::int64_t in_w, std::int64_t in_c,
                        const LayerSpec& layer);

/// Activation shape produced by `layer` for a given input activation.
ActivationShape next_activation(const ActivationShape& in, const LayerSpec& layer);

GemmShape pad_gemm(const GemmShape& shape, PaddingPolicy policy);

struct LayerGemm {
  std::size_t layer_index = 0;
  GemmShape shape;

  friend bool operator==(const LayerGemm&, const LayerGemm&) = default;
};

std::vector<LayerGemm> model_to_gemm_sequence(const ModelSpec& model, PaddingPolicy policy);

/// Checks batch/input extents and that every layer's geometry is valid.
void validate(const ModelSpec& model);

/// Single fully-connected layer whose GEMM is size x size x size.
ModelSpec square_gemm_model(std::int64_t size);

}  // namespace abft_guard
