#include "abft_guard/reports.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "abft_guard/documents.hpp"
#include "json_fields.hpp"

namespace abft_guard {

using detail::Json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

namespace {

Json shape_json(const GemmShape& s) { return {{"m", s.m}, {"n", s.n}, {"k", s.k}}; }

GemmShape shape_from(const Json& j, const std::string& path) {
  return {detail::as_int(detail::require(j, path, "m"), path + ".m", 1),
          detail::as_int(detail::require(j, path, "n"), path + ".n", 1),
          detail::as_int(detail::require(j, path, "k"), path + ".k", 1)};
}

Json dtype_json(const DType& d) {
  return {{"tag", std::string(to_string(d.tag))}, {"bytes_per_element", d.bytes_per_element}};
}

DType dtype_from(const Json& j, const std::string& path) {
  DType d;
  try {
    d.tag = element_type_from_string(detail::as_string(detail::require(j, path, "tag"), path + ".tag"));
  } catch (const ValidationError& e) {
    if (e.path() == path + ".tag") throw;
    throw ValidationError(path + ".tag", e.what());
  }
  d.bytes_per_element =
      static_cast<int>(detail::as_int(detail::require(j, path, "bytes_per_element"), path + ".bytes_per_element", 1));
  return d;
}

Json tiling_json(const TilingConfig& t) {
  return {{"tb_m", t.tb_m},         {"tb_n", t.tb_n},         {"warp_m", t.warp_m}, {"warp_n", t.warp_n},
          {"thread_m", t.thread_m}, {"thread_n", t.thread_n}, {"k_step", t.k_step}};
}

TilingConfig tiling_from(const Json& j, const std::string& path) {
  TilingConfig t;
  auto f = [&](const char* name) { return detail::as_int(detail::require(j, path, name), path + "." + name, 1); };
  t.tb_m = f("tb_m");
  t.tb_n = f("tb_n");
  t.warp_m = f("warp_m");
  t.warp_n = f("warp_n");
  t.thread_m = f("thread_m");
  t.thread_n = f("thread_n");
  t.k_step = f("k_step");
  return t;
}

Scheme scheme_from(const Json& j, const std::string& path) {
  const std::string s = detail::as_string(j, path);
  try {
    return scheme_from_string(s);
  } catch (const ValidationError&) {
    throw ValidationError(path, "unknown scheme '" + s + "'");
  }
}

Bound bound_from(const Json& j, const std::string& path) {
  const std::string s = detail::as_string(j, path);
  for (Bound b : {Bound::compute, Bound::bandwidth, Bound::balanced}) {
    if (to_string(b) == s) return b;
  }
  throw ValidationError(path, "unknown bound '" + s + "'");
}

CostSource source_from(const Json& j, const std::string& path) {
  const std::string s = detail::as_string(j, path);
  if (s == "model") return CostSource::model;
  if (s == "measured") return CostSource::measured;
  throw ValidationError(path, "unknown source '" + s + "'");
}

void check_kind(const Json& j, std::string_view kind) {
  detail::check_schema_version(j);
  if (detail::as_string(detail::require(j, "", "kind"), "kind") != kind) {
    throw ValidationError("kind", "expected '" + std::string(kind) + "'");
  }
}

template <Element T>
Json scalar_json(T v) {
  if constexpr (is_exact_v<T>) {
    return Json(v);
  } else {
    return detail::finite_or_null(static_cast<double>(v));
  }
}

}  // namespace

AnalysisReport analyze(const ModelSpec& model, const DeviceProfile& device, PaddingPolicy padding,
                       const DType& dtype) {
  const auto gemms = model_to_gemm_sequence(model, padding);
  if (gemms.empty()) throw EmptyInputError("no linear layers in model '" + model.name + "'");
  AnalysisReport r;
  r.model = model.name;
  r.device = device.name;
  r.padding = padding;
  r.dtype = dtype;
  r.cmr = cmr(device);
  std::vector<GemmShape> shapes;
  for (const auto& g : gemms) {
    r.layers.push_back({g.layer_index, g.shape, intensity_report(g.shape, dtype, device)});
    r.total_flops += r.layers.back().report.flops;
    r.total_bytes += r.layers.back().report.bytes;
    shapes.push_back(g.shape);
  }
  r.aggregate_intensity = aggregate_intensity(shapes, dtype);
  r.aggregate_bound = classify(r.aggregate_intensity, r.cmr);
  return r;
}

std::string to_json(const AnalysisReport& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "analysis";
  j["model"] = r.model;
  j["device"] = r.device;
  j["padding"] = std::string(to_string(r.padding));
  j["dtype"] = dtype_json(r.dtype);
  j["cmr"] = r.cmr;
  Json layers = Json::array();
  for (const auto& l : r.layers) {
    layers.push_back({{"layer_index", l.layer_index},
                      {"shape", shape_json(l.shape)},
                      {"flops", l.report.flops},
                      {"bytes", l.report.bytes},
                      {"ai", l.report.intensity},
                      {"bound", std::string(to_string(l.report.bound))}});
  }
  j["layers"] = std::move(layers);
  j["aggregate"] = {{"flops", r.total_flops},
                    {"bytes", r.total_bytes},
                    {"ai", r.aggregate_intensity},
                    {"bound", std::string(to_string(r.aggregate_bound))}};
  return j.dump(2) + "\n";
}

std::string to_csv(const AnalysisReport& r) {
  std::string out = "layer_index,ai,bound\n";
  for (const auto& l : r.layers) {
    out += std::to_string(l.layer_index) + "," + format_double(l.report.intensity) + "," +
           std::string(to_string(l.report.bound)) + "\n";
  }
  return out;
}

std::string to_json(const SelectionPlan& plan) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "selection-plan";
  j["device"] = plan.device;
  j["cmr"] = plan.cmr;
  j["alu_defaulted"] = plan.alu_defaulted;
  j["dtype"] = dtype_json(plan.dtype);
  j["tiling"] = tiling_json(plan.tiling);
  Json layers = Json::array();
  for (const auto& l : plan.layers) {
    Json candidates = Json::array();
    for (const auto& c : l.candidates) {
      candidates.push_back({{"scheme", std::string(to_string(c.scheme))},
                            {"base_time_s", c.estimate.base_time},
                            {"protected_time_s", c.estimate.protected_time},
                            {"overhead_pct", c.estimate.overhead_pct},
                            {"source", std::string(to_string(c.estimate.source))}});
    }
    layers.push_back({{"layer_index", l.layer_index},
                      {"shape", shape_json(l.shape)},
                      {"ai", l.intensity},
                      {"bound", std::string(to_string(l.bound))},
                      {"chosen", std::string(to_string(l.chosen))},
                      {"candidates", std::move(candidates)}});
  }
  j["layers"] = std::move(layers);
  j["base_time_total_s"] = plan.base_time_total;
  j["protected_time_total_s"] = plan.protected_time_total;
  j["aggregate_overhead_pct"] = plan.aggregate_overhead_pct;
  return j.dump(2) + "\n";
}

SelectionPlan plan_from_json(std::string_view text) {
  const Json j = detail::parse_json(text);
  check_kind(j, "selection-plan");
  SelectionPlan p;
  p.device = detail::as_string(detail::require(j, "", "device"), "device");
  p.cmr = detail::as_number(detail::require(j, "", "cmr"), "cmr");
  p.alu_defaulted = detail::as_bool(detail::require(j, "", "alu_defaulted"), "alu_defaulted");
  p.dtype = dtype_from(detail::require(j, "", "dtype"), "dtype");
  p.tiling = tiling_from(detail::require(j, "", "tiling"), "tiling");
  const Json& layers = detail::require(j, "", "layers");
  if (!layers.is_array()) throw ValidationError("layers", "expected an array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string path = detail::index_path("layers", i);
    const Json& l = layers[i];
    LayerPlan lp;
    lp.layer_index = detail::as_uint(detail::require(l, path, "layer_index"), path + ".layer_index");
    lp.shape = shape_from(detail::require(l, path, "shape"), path + ".shape");
    lp.intensity = detail::as_number(detail::require(l, path, "ai"), path + ".ai");
    lp.bound = bound_from(detail::require(l, path, "bound"), path + ".bound");
    lp.chosen = scheme_from(detail::require(l, path, "chosen"), path + ".chosen");
    const Json& cands = detail::require(l, path, "candidates");
    if (!cands.is_array()) throw ValidationError(path + ".candidates", "expected an array");
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const std::string cp = detail::index_path(path + ".candidates", c);
      CandidateEstimate ce;
      ce.scheme = scheme_from(detail::require(cands[c], cp, "scheme"), cp + ".scheme");
      ce.estimate.base_time = detail::as_number(detail::require(cands[c], cp, "base_time_s"), cp + ".base_time_s");
      ce.estimate.protected_time =
          detail::as_number(detail::require(cands[c], cp, "protected_time_s"), cp + ".protected_time_s");
      ce.estimate.overhead_pct = detail::as_number(detail::require(cands[c], cp, "overhead_pct"), cp + ".overhead_pct");
      ce.estimate.source = source_from(detail::require(cands[c], cp, "source"), cp + ".source");
      lp.candidates.push_back(ce);
    }
    p.layers.push_back(std::move(lp));
  }
  p.base_time_total = detail::as_number(detail::require(j, "", "base_time_total_s"), "base_time_total_s");
  p.protected_time_total = detail::as_number(detail::require(j, "", "protected_time_total_s"), "protected_time_total_s");
  p.aggregate_overhead_pct = detail::as_number(detail::require(j, "", "aggregate_overhead_pct"), "aggregate_overhead_pct");
  return p;
}

std::string summary_table(const SelectionPlan& plan) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "device %s  cmr %.1f%s\n", plan.device.c_str(), plan.cmr,
                plan.alu_defaulted ? "  (alu throughput defaulted to tensor/8)" : "");
  out << line;
  std::snprintf(line, sizeof line, "%5s  %22s  %9s  %-9s  %12s  %12s  %-16s\n", "layer", "m x n x k", "ai", "bound",
                "global %", "one-sided %", "chosen");
  out << line;
  for (const auto& l : plan.layers) {
    double global = NAN, one_sided = NAN;
    for (const auto& c : l.candidates) {
      if (c.scheme == Scheme::global_abft) global = c.estimate.overhead_pct;
      if (c.scheme == Scheme::thread_one_sided) one_sided = c.estimate.overhead_pct;
    }
    const std::string dims =
        std::to_string(l.shape.m) + "x" + std::to_string(l.shape.n) + "x" + std::to_string(l.shape.k);
    std::snprintf(line, sizeof line, "%5zu  %22s  %9.2f  %-9s  %12.3f  %12.3f  %-16s\n", l.layer_index, dims.c_str(),
                  l.intensity, std::string(to_string(l.bound)).c_str(), global, one_sided,
                  std::string(to_string(l.chosen)).c_str());
    out << line;
  }
  std::snprintf(line, sizeof line, "aggregate overhead %.3f%%\n", plan.aggregate_overhead_pct);
  out << line;
  return out.str();
}

std::string to_json(const CampaignReport& r) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "campaign-report";
  j["seed"] = r.seed;
  j["dtype"] = std::string(to_string(r.dtype));
  Json schemes = Json::array();
  for (const auto& s : r.schemes) {
    schemes.push_back({{"scheme", std::string(to_string(s.scheme))},
                       {"trials", s.trials},
                       {"detected", s.detected},
                       {"missed", s.missed},
                       {"masked", s.masked},
                       {"detection_rate", detail::finite_or_null(s.detection_rate())},
                       {"control_trials", s.control_trials},
                       {"false_positives", s.false_positives},
                       {"false_positive_rate", detail::finite_or_null(s.false_positive_rate())}});
  }
  j["schemes"] = std::move(schemes);
  return j.dump(2) + "\n";
}

CampaignReport campaign_report_from_json(std::string_view text) {
  const Json j = detail::parse_json(text);
  check_kind(j, "campaign-report");
  CampaignReport r;
  r.seed = detail::as_uint(detail::require(j, "", "seed"), "seed");
  try {
    r.dtype = element_type_from_string(detail::as_string(detail::require(j, "", "dtype"), "dtype"));
  } catch (const ValidationError& e) {
    throw ValidationError("dtype", e.what());
  }
  const Json& schemes = detail::require(j, "", "schemes");
  if (!schemes.is_array()) throw ValidationError("schemes", "expected an array");
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    const std::string path = detail::index_path("schemes", i);
    const Json& s = schemes[i];
    auto count = [&](const char* name) {
      return detail::as_uint(detail::require(s, path, name), path + "." + name);
    };
    SchemeStats st;
    st.scheme = scheme_from(detail::require(s, path, "scheme"), path + ".scheme");
    st.trials = count("trials");
    st.detected = count("detected");
    st.missed = count("missed");
    st.masked = count("masked");
    st.control_trials = count("control_trials");
    st.false_positives = count("false_positives");
    if (st.detected + st.missed + st.masked != st.trials) {
      throw ValidationError(path + ".trials", "detected + missed + masked must equal trials");
    }
    if (st.false_positives > st.control_trials) {
      throw ValidationError(path + ".false_positives", "exceeds control_trials");
    }
    r.schemes.push_back(st);
  }
  return r;
}

std::string to_csv(const CampaignReport& r) {
  std::string out =
      "scheme,trials,detected,missed,masked,detection_rate,control_trials,false_positives,false_positive_rate\n";
  for (const auto& s : r.schemes) {
    out += std::string(to_string(s.scheme)) + "," + std::to_string(s.trials) + "," + std::to_string(s.detected) + "," +
           std::to_string(s.missed) + "," + std::to_string(s.masked) + "," + format_double(s.detection_rate()) + "," +
           std::to_string(s.control_trials) + "," + std::to_string(s.false_positives) + "," +
           format_double(s.false_positive_rate()) + "\n";
  }
  return out;
}

template <Element T>
std::string to_json(const ExecutionReport<T>& r, Scheme scheme, const TilingConfig& tiling, ElementType mode) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "execution-report";
  j["scheme"] = std::string(to_string(scheme));
  j["dtype"] = std::string(to_string(mode));
  j["shape"] = shape_json(r.shape);
  j["executed_shape"] = shape_json(r.executed_shape);
  j["tiling"] = tiling_json(tiling);
  j["detected"] = r.detected;
  j["op_counts"] = {{"base_mma_count", r.op_counts.base_mma_count},
                    {"redundant_mma_count", r.op_counts.redundant_mma_count},
                    {"checksum_op_count", r.op_counts.checksum_op_count},
                    {"verification_op_count", r.op_counts.verification_op_count},
                    {"operand_load_count", r.op_counts.operand_load_count}};
  Json verdicts = Json::array();
  for (const auto& v : r.verdicts) {
    Json e;
    if (v.thread) {
      const auto& t = *v.thread;
      e["thread"] = {{"block", {t.block_row, t.block_col}},
                     {"warp", {t.warp_row, t.warp_col}},
                     {"thread", {t.thread_row, t.thread_col}},
                     {"origin", {t.origin_row(tiling), t.origin_col(tiling)}}};
    } else {
      e["thread"] = nullptr;
    }
    e["detected"] = v.verdict.detected;
    e["lhs"] = scalar_json(v.verdict.lhs);
    e["rhs"] = scalar_json(v.verdict.rhs);
    e["tolerance"] = v.verdict.tolerance_used;
    verdicts.push_back(std::move(e));
  }
  j["verdicts"] = std::move(verdicts);
  return j.dump(2) + "\n";
}

template std::string to_json(const ExecutionReport<std::int64_t>&, Scheme, const TilingConfig&, ElementType);
template std::string to_json(const ExecutionReport<float>&, Scheme, const TilingConfig&, ElementType);

}  // namespace abft_guard
