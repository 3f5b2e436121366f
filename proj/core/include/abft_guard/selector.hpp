#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "abft_guard/cost_model.hpp"
#include "abft_guard/roofline.hpp"

namespace abft_guard {

/// Externally measured per-layer kernel times, keyed by (layer, scheme).
/// An "unprotected" entry supplies T_o for that layer.
class MeasuredTimings {
 public:
  void set(std::size_t layer_index, Scheme scheme, double seconds);
  std::optional<double> get(std::size_t layer_index, Scheme scheme) const;
  bool empty() const noexcept { return times_.empty(); }
  std::size_t size() const noexcept { return times_.size(); }

  /// Layers referenced by any entry.
  std::vector<std::size_t> layers() const;

  /// CSV with header `layer_index,scheme,time_us`. Throws ValidationError
  /// with a "line N" path on malformed rows.
  static MeasuredTimings parse_csv(std::istream& in);

 private:
  std::map<std::pair<std::size_t, Scheme>, double> times_;
};

/// Schemes the selector chooses between.
inline constexpr Scheme kSelectableSchemes[] = {Scheme::global_abft, Scheme::thread_one_sided};

struct CandidateEstimate {
  Scheme scheme = Scheme::global_abft;
  OverheadEstimate estimate;
};

struct LayerPlan {
  std::size_t layer_index = 0;
  GemmShape shape;
  double intensity = 0.0;
  Bound bound = Bound::balanced;
  Scheme chosen = Scheme::global_abft;
  std::vector<CandidateEstimate> candidates;

  const CandidateEstimate& chosen_estimate() const;
};

struct SelectionPlan {
  std::string device;
  double cmr = 0.0;
  bool alu_defaulted = false;
  DType dtype;
  TilingConfig tiling;
  std::vector<LayerPlan> layers;
  double base_time_total = 0.0;
  double protected_time_total = 0.0;
  double aggregate_overhead_pct = 0.0;  // 100 * (sum T_r / sum T_o - 1)
};

/// Per layer, picks the candidate with the lowest overhead; measured entries
/// replace model estimates for their (layer, scheme). Ties go to global ABFT.
/// Throws EmptyInputError on no layers and ValidationError when `measured`
/// names a layer that is not in `layers`.
SelectionPlan select(std::span<const LayerGemm> layers, const DType& dtype, const DeviceProfile& device,
                     const TilingConfig& tiling, const MeasuredTimings* measured = nullptr);

/// Aggregate overhead when every layer uses `scheme`, under the same cost
/// source as `select`.
double uniform_policy_overhead_pct(std::span<const LayerGemm> layers, const DType& dtype, const DeviceProfile& device,
                                   const TilingConfig& tiling, Scheme scheme,
                                   const MeasuredTimings* measured = nullptr);

}  // namespace abft_guard
