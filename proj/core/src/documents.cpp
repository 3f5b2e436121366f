#include "abft_guard/documents.hpp"

#include <fstream>
#include <sstream>

#include "json_fields.hpp"

namespace abft_guard {

using detail::Json;

namespace {

std::pair<std::int64_t, std::int64_t> int_pair(const Json& layer, const std::string& parent, const std::string& key,
                                               std::int64_t fallback, std::int64_t min_value) {
  const auto it = layer.find(key);
  const std::string path = detail::join_path(parent, key);
  if (it == layer.end()) return {fallback, fallback};
  if (it->is_number_integer()) {
    const auto v = detail::as_int(*it, path, min_value);
    return {v, v};
  }
  if (!it->is_array() || it->size() != 2) throw ValidationError(path, "expected an integer or a 2-element array");
  return {detail::as_int((*it)[0], detail::index_path(path, 0), min_value),
          detail::as_int((*it)[1], detail::index_path(path, 1), min_value)};
}

LayerSpec parse_layer(const Json& j, const std::string& path) {
  detail::require_object(j, path);
  const std::string type = detail::as_string(detail::require(j, path, "type"), detail::join_path(path, "type"));
  if (type == "conv") {
    if (const auto g = j.find("groups"); g != j.end()) {
      if (detail::as_int(*g, detail::join_path(path, "groups"), 1) != 1) {
        throw ValidationError(detail::join_path(path, "groups"),
                              "grouped convolutions are not supported; replace them with dense convolutions");
      }
    }
    ConvParams p;
    p.out_channels =
        detail::as_int(detail::require(j, path, "out_channels"), detail::join_path(path, "out_channels"), 1);
    if (j.find("kernel") == j.end()) throw ValidationError(detail::join_path(path, "kernel"), "missing required field");
    std::tie(p.kernel_h, p.kernel_w) = int_pair(j, path, "kernel", 1, 1);
    std::tie(p.stride_h, p.stride_w) = int_pair(j, path, "stride", 1, 1);
    std::tie(p.pad_h, p.pad_w) = int_pair(j, path, "padding", 0, 0);
    return LayerSpec{p};
  }
  if (type == "fc") {
    return LayerSpec::fc(
        detail::as_int(detail::require(j, path, "out_features"), detail::join_path(path, "out_features"), 1));
  }
  throw ValidationError(detail::join_path(path, "type"), "unknown layer type '" + type + "' (expected conv or fc)");
}

}  // namespace

ModelSpec parse_model(std::string_view json_text) {
  const Json j = detail::parse_json(json_text);
  detail::check_schema_version(j);
  ModelSpec model;
  model.name = detail::as_string(detail::require(j, "", "name"), "name");
  model.batch = detail::as_int(detail::require(j, "", "batch"), "batch", 1);
  const Json& input = detail::require(j, "", "input");
  detail::require_object(input, "input");
  model.input_h = detail::as_int(detail::require(input, "input", "h"), "input.h", 1);
  model.input_w = detail::as_int(detail::require(input, "input", "w"), "input.w", 1);
  model.input_c = detail::as_int(detail::require(input, "input", "c"), "input.c", 1);
  const Json& layers = detail::require(j, "", "layers");
  if (!layers.is_array()) throw ValidationError("layers", "expected an array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    model.layers.push_back(parse_layer(layers[i], detail::index_path("layers", i)));
  }
  validate(model);
  return model;
}

DeviceProfile parse_device(std::string_view json_text) {
  const Json j = detail::parse_json(json_text);
  detail::check_schema_version(j);
  const std::string name = detail::as_string(detail::require(j, "", "name"), "name");
  const double tensor = detail::as_positive(detail::require(j, "", "tensor_tflops"), "tensor_tflops");
  const double bw = detail::as_positive(detail::require(j, "", "mem_bw_gbs"), "mem_bw_gbs");
  double alu = 0.0;
  if (const auto it = j.find("alu_tflops"); it != j.end()) alu = detail::as_positive(*it, "alu_tflops");
  double launch_us = kDefaultVerificationLaunchLatency * 1e6;
  if (const auto it = j.find("verification_launch_us"); it != j.end()) {
    launch_us = detail::as_number(*it, "verification_launch_us");
    if (launch_us < 0.0) throw ValidationError("verification_launch_us", "must be >= 0");
  }
  DeviceProfile d = DeviceProfile::from_datasheet(name, tensor, bw, alu, launch_us);
  validate(d);
  return d;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelSpec load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path)); }

DeviceProfile load_device(const std::filesystem::path& path) { return parse_device(read_text_file(path)); }

std::string model_to_json(const ModelSpec& model) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = model.name;
  j["batch"] = model.batch;
  j["input"] = {{"h", model.input_h}, {"w", model.input_w}, {"c", model.input_c}};
  Json layers = Json::array();
  for (const auto& layer : model.layers) {
    if (const auto* c = std::get_if<ConvParams>(&layer.params)) {
      layers.push_back({{"type", "conv"},
                        {"out_channels", c->out_channels},
                        {"kernel", {c->kernel_h, c->kernel_w}},
                        {"stride", {c->stride_h, c->stride_w}},
                        {"padding", {c->pad_h, c->pad_w}}});
    } else {
      layers.push_back({{"type", "fc"}, {"out_features", std::get<FcParams>(layer.params).out_features}});
    }
  }
  j["layers"] = std::move(layers);
  return j.dump(2) + "\n";
}

}  // namespace abft_guard
