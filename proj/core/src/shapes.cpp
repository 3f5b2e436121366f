#include "abft_guard/shapes.hpp"

#include <string>

#include "abft_guard/errors.hpp"

namespace abft_guard {

namespace {

std::int64_t round_up(std::int64_t value, std::int64_t multiple) {
  return (value + multiple - 1) / multiple * multiple;
}

std::int64_t conv_extent(std::int64_t in, std::int64_t kernel, std::int64_t stride, std::int64_t pad) {
  // Floor division; the numerator may be negative.
  const std::int64_t span = in + 2 * pad - kernel;
  if (span < 0) return 0;
  return span / stride + 1;
}

void check_conv_params(const ConvParams& p) {
  if (p.out_channels < 1) throw InvalidLayerError("conv out_channels must be >= 1");
  if (p.kernel_h < 1 || p.kernel_w < 1) throw InvalidLayerError("conv kernel must be >= 1");
  if (p.stride_h < 1 || p.stride_w < 1) throw InvalidLayerError("conv stride must be >= 1");
  if (p.pad_h < 0 || p.pad_w < 0) throw InvalidLayerError("conv padding must be >= 0");
}

}  // namespace

void validate(const GemmShape& shape) {
  if (shape.m < 1 || shape.n < 1 || shape.k < 1) {
    throw InvalidLayerError("GEMM dimensions must be >= 1 (got m=" + std::to_string(shape.m) +
                            ", n=" + std::to_string(shape.n) + ", k=" + std::to_string(shape.k) + ")");
  }
}

std::string_view to_string(ElementType type) {
  switch (type) {
    case ElementType::exact_int: return "exact-int";
    case ElementType::binary16: return "binary16";
    case ElementType::binary32: return "binary32";
  }
  return "unknown";
}

ElementType element_type_from_string(std::string_view name) {
  if (name == "exact-int" || name == "int") return ElementType::exact_int;
  if (name == "binary16" || name == "fp16") return ElementType::binary16;
  if (name == "binary32" || name == "fp32") return ElementType::binary32;
  throw ValidationError("dtype", "unknown element type '" + std::string(name) + "'");
}

DType DType::exact_int(int bytes_per_element) {
  if (bytes_per_element < 1) throw ValidationError("dtype.bytes_per_element", "must be >= 1");
  return {ElementType::exact_int, bytes_per_element};
}

DeviceProfile DeviceProfile::from_datasheet(std::string name, double tensor_tflops, double mem_bw_gbs,
                                            double alu_tflops, double verification_launch_us) {
  DeviceProfile d;
  d.name = std::move(name);
  d.tensor_throughput = tensor_tflops * 1e12;
  d.memory_bandwidth = mem_bw_gbs * 1e9;
  if (alu_tflops > 0.0) {
    d.alu_throughput = alu_tflops * 1e12;
  } else {
    d.alu_throughput = d.tensor_throughput * kDefaultAluFraction;
    d.alu_defaulted = true;
  }
  d.verification_launch_latency = verification_launch_us * 1e-6;
  return d;
}

void validate(const DeviceProfile& device) {
  if (!(device.tensor_throughput > 0.0)) throw ValidationError("tensor_tflops", "must be > 0");
  if (!(device.alu_throughput > 0.0)) throw ValidationError("alu_tflops", "must be > 0");
  if (!(device.memory_bandwidth > 0.0)) throw ValidationError("mem_bw_gbs", "must be > 0");
  if (!(device.verification_launch_latency >= 0.0)) {
    throw ValidationError("verification_launch_us", "must be >= 0");
  }
}

std::string_view to_string(PaddingPolicy policy) {
  return policy == PaddingPolicy::none ? "none" : "eight";
}

std::pair<std::int64_t, std::int64_t> conv_output_shape(std::int64_t in_h, std::int64_t in_w,
                                                        const LayerSpec& layer) {
  const auto* conv = std::get_if<ConvParams>(&layer.params);
  if (conv == nullptr) throw InvalidLayerError("conv_output_shape called on a fully-connected layer");
  check_conv_params(*conv);
  const std::int64_t out_h = conv_extent(in_h, conv->kernel_h, conv->stride_h, conv->pad_h);
  const std::int64_t out_w = conv_extent(in_w, conv->kernel_w, conv->stride_w, conv->pad_w);
  if (out_h < 1 || out_w < 1) {
    throw InvalidLayerError("conv output extent is not positive for input " + std::to_string(in_h) + "x" +
                            std::to_string(in_w) + " and kernel " + std::to_string(conv->kernel_h) + "x" +
                            std::to_string(conv->kernel_w));
  }
  return {out_h, out_w};
}

GemmShape layer_to_gemm(std::int64_t batch, std::int64_t in_h, std::int64_t in_w, std::int64_t in_c,
                        const LayerSpec& layer) {
  if (batch < 1 || in_h < 1 || in_w < 1 || in_c < 1) {
    throw InvalidLayerError("batch and input extents must be >= 1");
  }
  if (const auto* conv = std::get_if<ConvParams>(&layer.params)) {
    const auto [out_h, out_w] = conv_output_shape(in_h, in_w, layer);
    return {batch * out_h * out_w, conv->out_channels, in_c * conv->kernel_h * conv->kernel_w};
  }
  const auto& fc = std::get<FcParams>(layer.params);
  if (fc.out_features < 1) throw InvalidLayerError("fc out_features must be >= 1");
  return {batch, fc.out_features, in_h * in_w * in_c};
}

ActivationShape next_activation(const ActivationShape& in, const LayerSpec& layer) {
  if (const auto* conv = std::get_if<ConvParams>(&layer.params)) {
    const auto [out_h, out_w] = conv_output_shape(in.h, in.w, layer);
    return {out_h, out_w, conv->out_channels};
  }
  return {1, 1, std::get<FcParams>(layer.params).out_features};
}

GemmShape pad_gemm(const GemmShape& shape, PaddingPolicy policy) {
  if (policy == PaddingPolicy::none) return shape;
  return {round_up(shape.m, 8), round_up(shape.n, 8), round_up(shape.k, 8)};
}

std::vector<LayerGemm> model_to_gemm_sequence(const ModelSpec& model, PaddingPolicy policy) {
  if (model.batch < 1) throw InvalidLayerError("batch must be >= 1");
  std::vector<LayerGemm> out;
  out.reserve(model.layers.size());
  ActivationShape act{model.input_h, model.input_w, model.input_c};
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const auto& layer = model.layers[i];
    try {
      const GemmShape shape = layer_to_gemm(model.batch, act.h, act.w, act.c, layer);
      out.push_back({i, pad_gemm(shape, policy)});
      act = next_activation(act, layer);
    } catch (const InvalidLayerError& e) {
      throw InvalidLayerError("layer " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

void validate(const ModelSpec& model) {
  if (model.batch < 1) throw ValidationError("batch", "must be >= 1");
  if (model.input_h < 1) throw ValidationError("input.h", "must be >= 1");
  if (model.input_w < 1) throw ValidationError("input.w", "must be >= 1");
  if (model.input_c < 1) throw ValidationError("input.c", "must be >= 1");
  ActivationShape act{model.input_h, model.input_w, model.input_c};
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    try {
      act = next_activation(act, model.layers[i]);
      if (const auto* fc = std::get_if<FcParams>(&model.layers[i].params); fc && fc->out_features < 1) {
        throw InvalidLayerError("out_features must be >= 1");
      }
    } catch (const InvalidLayerError& e) {
      throw ValidationError("layers[" + std::to_string(i) + "]", e.what());
    }
  }
}

ModelSpec square_gemm_model(std::int64_t size) {
  if (size < 1) throw ValidationError("size", "must be >= 1");
  ModelSpec model;
  model.name = "square-" + std::to_string(size);
  model.batch = size;
  model.input_c = size;
  model.layers.push_back(LayerSpec::fc(size));
  return model;
}

}  // namespace abft_guard
