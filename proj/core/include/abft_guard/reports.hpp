#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "abft_guard/campaign.hpp"
#include "abft_guard/executor.hpp"
#include "abft_guard/roofline.hpp"
#include "abft_guard/selector.hpp"

namespace abft_guard {

struct LayerIntensity {
  std::size_t layer_index = 0;
  GemmShape shape;
  IntensityReport report;
};

struct AnalysisReport {
  std::string model;
  std::string device;
  PaddingPolicy padding = PaddingPolicy::none;
  DType dtype;
  double cmr = 0.0;
  std::vector<LayerIntensity> layers;
  std::uint64_t total_flops = 0;
  std::uint64_t total_bytes = 0;
  double aggregate_intensity = 0.0;
  Bound aggregate_bound = Bound::balanced;
};

/// Throws EmptyInputError("no linear layers") for a model without GEMMs.
AnalysisReport analyze(const ModelSpec& model, const DeviceProfile& device, PaddingPolicy padding, const DType& dtype);

std::string to_json(const AnalysisReport& report);
/// `layer_index,ai,bound`, one row per layer.
std::string to_csv(const AnalysisReport& report);

std::string to_json(const SelectionPlan& plan);
/// Inverse of to_json(SelectionPlan). Throws ValidationError with a field path.
SelectionPlan plan_from_json(std::string_view json_text);

/// Fixed-width table for terminals.
std::string summary_table(const SelectionPlan& plan);

std::string to_json(const CampaignReport& report);
CampaignReport campaign_report_from_json(std::string_view json_text);
/// `scheme,trials,detected,missed,masked,detection_rate,control_trials,false_positives,false_positive_rate`
std::string to_csv(const CampaignReport& report);

template <Element T>
std::string to_json(const ExecutionReport<T>& report, Scheme scheme, const TilingConfig& tiling, ElementType mode);

/// Shortest round-trip decimal form; "nan"/"inf" for non-finite values.
std::string format_double(double value);

}  // namespace abft_guard
