#pragma once

#include <string_view>

#include "abft_guard/shapes.hpp"
#include "abft_guard/tiling.hpp"

namespace abft_guard {

enum class CostSource { model, measured };

std::string_view to_string(CostSource source);

struct OverheadEstimate {
  double base_time = 0.0;       // T_o, seconds
  double protected_time = 0.0;  // T_r, seconds
  double overhead_pct = 0.0;    // 100 * (T_r - T_o) / T_o
  CostSource source = CostSource::model;
};

/// 100 * (t_r - t_o) / t_o.
double overhead_pct(double base_time, double protected_time);

OverheadEstimate make_estimate(double base_time, double protected_time, CostSource source);

/// Roofline time: max(flops / tensor throughput, bytes / memory bandwidth).
double base_time(const GemmShape& shape, const DType& dtype, const DeviceProfile& device);

/// Modelled execution time of `shape` under `scheme`.
///
/// Global ABFT adds m*k + m*n + 2k ALU FLOPs, (k + n + 2) elements of
/// checksum traffic and one verification kernel launch. Thread-level schemes
/// add no memory traffic; their redundant MMAs run on the tensor path and
/// their checksum/verification adds on the ALU path, with counts taken from
/// count_redundant_ops on the shape rounded up to the thread tile.
/// T_r = max(tensor time, ALU time, memory time) + launch latency.
double scheme_time(const GemmShape& shape, const DType& dtype, const DeviceProfile& device, Scheme scheme,
                   const TilingConfig& tiling);

OverheadEstimate estimate_overhead(const GemmShape& shape, const DType& dtype, const DeviceProfile& device,
                                   Scheme scheme, const TilingConfig& tiling);

/// FLOPs of one MMA of the given scheme's redundant path (2 * rows * k_step).
double redundant_mma_flops(Scheme scheme, const TilingConfig& tiling);

}  // namespace abft_guard
