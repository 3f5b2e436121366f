#include "abft_guard/roofline.hpp"

#include "abft_guard/errors.hpp"

namespace abft_guard {

std::string_view to_string(Bound bound) {
  switch (bound) {
    case Bound::compute: return "compute";
    case Bound::bandwidth: return "bandwidth";
    case Bound::balanced: return "balanced";
  }
  return "unknown";
}

std::uint64_t gemm_flops(const GemmShape& shape) {
  validate(shape);
  return 2ULL * static_cast<std::uint64_t>(shape.m) * static_cast<std::uint64_t>(shape.n) *
         static_cast<std::uint64_t>(shape.k);
}

std::uint64_t gemm_bytes(const GemmShape& shape, const DType& dtype) {
  validate(shape);
  const auto m = static_cast<std::uint64_t>(shape.m);
  const auto n = static_cast<std::uint64_t>(shape.n);
  const auto k = static_cast<std::uint64_t>(shape.k);
  return static_cast<std::uint64_t>(dtype.bytes_per_element) * (m * k + k * n + m * n);
}

double arithmetic_intensity(const GemmShape& shape, const DType& dtype) {
  return static_cast<double>(gemm_flops(shape)) / static_cast<double>(gemm_bytes(shape, dtype));
}

double cmr(const DeviceProfile& device) {
  validate(device);
  return device.tensor_throughput / device.memory_bandwidth;
}

Bound classify(double intensity, double cmr_value) {
  if (intensity > cmr_value) return Bound::compute;
  if (intensity < cmr_value) return Bound::bandwidth;
  return Bound::balanced;
}

IntensityReport intensity_report(const GemmShape& shape, const DType& dtype, const DeviceProfile& device) {
  IntensityReport r;
  r.flops = gemm_flops(shape);
  r.bytes = gemm_bytes(shape, dtype);
  r.intensity = static_cast<double>(r.flops) / static_cast<double>(r.bytes);
  r.bound = classify(r.intensity, cmr(device));
  return r;
}

double aggregate_intensity(std::span<const GemmShape> shapes, const DType& dtype) {
  if (shapes.empty()) throw EmptyInputError("aggregate intensity of an empty layer list");
  std::uint64_t flops = 0;
  std::uint64_t bytes = 0;
  for (const auto& s : shapes) {
    flops += gemm_flops(s);
    bytes += gemm_bytes(s, dtype);
  }
  return static_cast<double>(flops) / static_cast<double>(bytes);
}

}  // namespace abft_guard
