#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "slam3d/eval.hpp"

namespace slam3d {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
  std::string command;
  std::uint64_t config_hash = 0;
  std::vector<std::string> input_paths;
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  std::int64_t wall_ms = 0;
};

/// FNV-1a 64 over the canonical flag text.
std::uint64_t fnv1a64(std::string_view bytes);

/// Sorted `--name=value` pairs joined by newlines, hashed.
std::uint64_t config_hash(std::vector<std::pair<std::string, std::string>> flags);

nlohmann::json to_json(const RunManifest& m);

/// Method/Category column, then Easy Mod. Hard under each IoU config, one
/// block per metric (AP3D, AP_BEV, sigma_3D). Absent values print as "-".
std::string format_table(const EvalReport& r, const std::string& method);

/// method,class,difficulty,iou_config,metric,value; absent values are empty.
std::string format_csv(const EvalReport& r, const std::string& method);

nlohmann::json report_to_json(const EvalReport& r, const std::string& method, const RunManifest& m);

}  // namespace slam3d
