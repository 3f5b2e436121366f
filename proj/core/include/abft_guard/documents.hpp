#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "abft_guard/shapes.hpp"

namespace abft_guard {

/// Current version of every JSON document this library reads or writes.
inline constexpr int kSchemaVersion = 1;

// Model document:
//   {"schema_version": 1, "name": "...", "batch": B, "input": {"h": H, "w": W, "c": C},
//    "layers": [{"type": "conv", "out_channels": N, "kernel": [kh, kw],
//                "stride": [sh, sw], "padding": [ph, pw], "groups": 1},
//               {"type": "fc", "out_features": N}]}
// "stride", "padding" and "groups" are optional. groups > 1 is rejected.
//
// Device document:
//   {"schema_version": 1, "name": "...", "tensor_tflops": X, "mem_bw_gbs": Y,
//    "alu_tflops": Z?, "verification_launch_us": L?}
//
// Parsers throw ValidationError whose path() names the offending field.

ModelSpec parse_model(std::string_view json_text);
DeviceProfile parse_device(std::string_view json_text);

ModelSpec load_model(const std::filesystem::path& path);
DeviceProfile load_device(const std::filesystem::path& path);

std::string model_to_json(const ModelSpec& model);

/// Whole file as text; ValidationError (path = file name) when unreadable.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace abft_guard
