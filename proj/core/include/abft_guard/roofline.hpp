#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "abft_guard/shapes.hpp"

namespace abft_guard {

enum class Bound { compute, bandwidth, balanced };

std::string_view to_string(Bound bound);

struct IntensityReport {
  std::uint64_t flops = 0;
  std::uint64_t bytes = 0;
  double intensity = 0.0;  // FLOPs per byte
  Bound bound = Bound::balanced;
};

/// 2*m*n*k: one multiply and one add per inner-product term.
std::uint64_t gemm_flops(const GemmShape& shape);

/// A, B and C each moved once; no cache or re-read modelling.
std::uint64_t gemm_bytes(const GemmShape& shape, const DType& dtype);

double arithmetic_intensity(const GemmShape& shape, const DType& dtype);

/// Compute-to-memory-bandwidth ratio on the tensor path.
double cmr(const DeviceProfile& device);

/// compute iff intensity > cmr, bandwidth iff intensity < cmr.
Bound classify(double intensity, double cmr_value);

IntensityReport intensity_report(const GemmShape& shape, const DType& dtype, const DeviceProfile& device);

/// Sum of FLOPs over sum of bytes. Throws EmptyInputError on an empty list.
double aggregate_intensity(std::span<const GemmShape> shapes, const DType& dtype);

}  // namespace abft_guard
