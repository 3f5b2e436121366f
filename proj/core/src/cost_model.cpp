#include "abft_guard/cost_model.hpp"

#include <algorithm>

#include "abft_guard/roofline.hpp"

namespace abft_guard {

namespace {

constexpr double kGlobalChecksumTrafficConstant = 2.0;  // output-summation partial write + read

std::int64_t round_up(std::int64_t value, std::int64_t multiple) {
  return (value + multiple - 1) / multiple * multiple;
}

}  // namespace

std::string_view to_string(CostSource source) { return source == CostSource::model ? "model" : "measured"; }

double overhead_pct(double base_time, double protected_time) {
  return 100.0 * (protected_time - base_time) / base_time;
}

OverheadEstimate make_estimate(double base_time, double protected_time, CostSource source) {
  return {base_time, protected_time, overhead_pct(base_time, protected_time), source};
}

double base_time(const GemmShape& shape, const DType& dtype, const DeviceProfile& device) {
  validate(device);
  const double compute = static_cast<double>(gemm_flops(shape)) / device.tensor_throughput;
  const double memory = static_cast<double>(gemm_bytes(shape, dtype)) / device.memory_bandwidth;
  return std::max(compute, memory);
}

double redundant_mma_flops(Scheme scheme, const TilingConfig& tiling) {
  switch (scheme) {
    case Scheme::thread_two_sided: return 2.0 * static_cast<double>(tiling.k_step);
    case Scheme::thread_one_sided:
    case Scheme::thread_replication_full:
    case Scheme::thread_replication_single_acc: return 4.0 * static_cast<double>(tiling.k_step);
    default: return 0.0;
  }
}

double scheme_time(const GemmShape& shape, const DType& dtype, const DeviceProfile& device, Scheme scheme,
                   const TilingConfig& tiling) {
  validate(device);
  validate(tiling);
  double tensor_flops = static_cast<double>(gemm_flops(shape));
  double alu_flops = 0.0;
  double bytes = static_cast<double>(gemm_bytes(shape, dtype));
  double latency = 0.0;

  const auto m = static_cast<double>(shape.m);
  const auto n = static_cast<double>(shape.n);
  const auto k = static_cast<double>(shape.k);

  if (scheme == Scheme::unprotected) return base_time(shape, dtype, device);

  if (scheme == Scheme::global_abft) {
    alu_flops = m * k + m * n + 2.0 * k;
    bytes += static_cast<double>(dtype.bytes_per_element) * (k + n + kGlobalChecksumTrafficConstant);
    latency = device.verification_launch_latency;
  } else {
    const GemmShape tiled{round_up(shape.m, tiling.thread_m), round_up(shape.n, tiling.thread_n),
                          round_up(shape.k, tiling.k_step)};
    const OpCounts ops = count_redundant_ops(scheme, tiling, tiled);
    tensor_flops += static_cast<double>(ops.redundant_mma_count) * redundant_mma_flops(scheme, tiling);
    alu_flops = static_cast<double>(ops.checksum_op_count + ops.verification_op_count);
  }

  const double t = std::max({tensor_flops / device.tensor_throughput, alu_flops / device.alu_throughput,
                             bytes / device.memory_bandwidth});
  return t + latency;
}

OverheadEstimate estimate_overhead(const GemmShape& shape, const DType& dtype, const DeviceProfile& device,
                                   Scheme scheme, const TilingConfig& tiling) {
  return make_estimate(base_time(shape, dtype, device), scheme_time(shape, dtype, device, scheme, tiling),
                       CostSource::model);
}

}  // namespace abft_guard
