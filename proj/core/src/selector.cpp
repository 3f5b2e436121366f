#include "abft_guard/selector.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <set>
#include <sstream>

#include "abft_guard/errors.hpp"

namespace abft_guard {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double layer_base_time(const LayerGemm& layer, const DType& dtype, const DeviceProfile& device,
                       const MeasuredTimings* measured) {
  if (measured) {
    if (auto t = measured->get(layer.layer_index, Scheme::unprotected)) return *t;
  }
  return base_time(layer.shape, dtype, device);
}

OverheadEstimate layer_estimate(const LayerGemm& layer, double t_o, const DType& dtype, const DeviceProfile& device,
                                const TilingConfig& tiling, Scheme scheme, const MeasuredTimings* measured) {
  if (measured) {
    if (auto t = measured->get(layer.layer_index, scheme)) return make_estimate(t_o, *t, CostSource::measured);
  }
  return make_estimate(t_o, scheme_time(layer.shape, dtype, device, scheme, tiling), CostSource::model);
}

void check_measured_layers(std::span<const LayerGemm> layers, const MeasuredTimings* measured) {
  if (!measured) return;
  std::set<std::size_t> known;
  for (const auto& l : layers) known.insert(l.layer_index);
  for (std::size_t idx : measured->layers()) {
    if (!known.count(idx)) {
      throw ValidationError("timings", "measured timing references unknown layer " + std::to_string(idx));
    }
  }
}

}  // namespace

void MeasuredTimings::set(std::size_t layer_index, Scheme scheme, double seconds) {
  times_[{layer_index, scheme}] = seconds;
}

std::optional<double> MeasuredTimings::get(std::size_t layer_index, Scheme scheme) const {
  const auto it = times_.find({layer_index, scheme});
  if (it == times_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> MeasuredTimings::layers() const {
  std::vector<std::size_t> out;
  for (const auto& [key, _] : times_) {
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  }
  return out;
}

MeasuredTimings MeasuredTimings::parse_csv(std::istream& in) {
  MeasuredTimings timings;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = "line " + std::to_string(line_no);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"layer_index", "scheme", "time_us"}) {
        throw ValidationError(where, "expected header 'layer_index,scheme,time_us'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) throw ValidationError(where, "expected 3 fields");
    std::size_t layer = 0;
    const auto& lf = fields[0];
    auto [p, ec] = std::from_chars(lf.data(), lf.data() + lf.size(), layer);
    if (ec != std::errc{} || p != lf.data() + lf.size()) throw ValidationError(where, "bad layer_index '" + lf + "'");
    Scheme scheme;
    try {
      scheme = scheme_from_string(fields[1]);
    } catch (const ValidationError&) {
      throw ValidationError(where, "unknown scheme '" + fields[1] + "'");
    }
    double us = 0.0;
    try {
      std::size_t used = 0;
      us = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError(where, "bad time_us '" + fields[2] + "'");
    }
    if (!(us > 0.0) || !std::isfinite(us)) throw ValidationError(where, "time_us must be positive");
    timings.set(layer, scheme, us * 1e-6);
  }
  if (!header_seen) throw ValidationError("line 1", "missing header 'layer_index,scheme,time_us'");
  return timings;
}

const CandidateEstimate& LayerPlan::chosen_estimate() const {
  for (const auto& c : candidates) {
    if (c.scheme == chosen) return c;
  }
  throw Error("layer plan has no estimate for its chosen scheme");
}

SelectionPlan select(std::span<const LayerGemm> layers, const DType& dtype, const DeviceProfile& device,
                     const TilingConfig& tiling, const MeasuredTimings* measured) {
  if (layers.empty()) throw EmptyInputError("no linear layers to plan");
  validate(device);
  validate(tiling);
  check_measured_layers(layers, measured);

  SelectionPlan plan;
  plan.device = device.name;
  plan.cmr = cmr(device);
  plan.alu_defaulted = device.alu_defaulted;
  plan.dtype = dtype;
  plan.tiling = tiling;

  for (const auto& layer : layers) {
    LayerPlan lp;
    lp.layer_index = layer.layer_index;
    lp.shape = layer.shape;
    lp.intensity = arithmetic_intensity(layer.shape, dtype);
    lp.bound = classify(lp.intensity, plan.cmr);
    const double t_o = layer_base_time(layer, dtype, device, measured);
    for (Scheme s : kSelectableSchemes) {
      lp.candidates.push_back({s, layer_estimate(layer, t_o, dtype, device, tiling, s, measured)});
    }
    // kSelectableSchemes lists global first, so strict < keeps ties on global.
    const CandidateEstimate* best = &lp.candidates.front();
    for (const auto& c : lp.candidates) {
      if (c.estimate.overhead_pct < best->estimate.overhead_pct) best = &c;
    }
    lp.chosen = best->scheme;
    plan.base_time_total += t_o;
    plan.protected_time_total += best->estimate.protected_time;
    plan.layers.push_back(std::move(lp));
  }
  plan.aggregate_overhead_pct = overhead_pct(plan.base_time_total, plan.protected_time_total);
  return plan;
}

double uniform_policy_overhead_pct(std::span<const LayerGemm> layers, const DType& dtype, const DeviceProfile& device,
                                   const TilingConfig& tiling, Scheme scheme, const MeasuredTimings* measured) {
  if (layers.empty()) throw EmptyInputError("no linear layers to plan");
  check_measured_layers(layers, measured);
  double t_o = 0.0;
  double t_r = 0.0;
  for (const auto& layer : layers) {
    const double base = layer_base_time(layer, dtype, device, measured);
    t_o += base;
    t_r += layer_estimate(layer, base, dtype, device, tiling, scheme, measured).protected_time;
  }
  return overhead_pct(t_o, t_r);
}

}  // namespace abft_guard
