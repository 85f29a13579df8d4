#include "slam3d/report.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>

namespace slam3d {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t config_hash(std::vector<std::pair<std::string, std::string>> flags) {
  std::sort(flags.begin(), flags.end());
  std::string canon;
  for (const auto& [k, v] : flags) canon += "--" + k + "=" + v + "\n";
  return fnv1a64(canon);
}

nlohmann::json to_json(const RunManifest& m) {
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(m.config_hash));
  return {{"command", m.command},   {"config_hash", hash},           {"input_paths", m.input_paths},
          {"seed", m.seed},         {"tool_version", m.tool_version}, {"wall_ms", m.wall_ms}};
}

namespace {

std::vector<IouConfig> configs_in(const EvalReport& r) {
  std::set<IouConfig> seen;
  for (const auto& c : r.cells) seen.insert(c.iou_config);
  return {seen.begin(), seen.end()};
}

std::string fmt(std::optional<double> v, const char* spec = "%.2f") {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, spec, *v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w, bool right = true) {
  if (s.size() >= w) return s;
  return right ? std::string(w - s.size(), ' ') + s : s + std::string(w - s.size(), ' ');
}

std::string thresholds_label(const EvalReport& r, IouConfig c) {
  std::string out = "IoU ";
  for (std::size_t i = 0; i < kEvalClasses.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2g", r.at(kEvalClasses[i], Difficulty::Easy, c).threshold);
    out += (i ? "/" : "") + std::string(buf);
  }
  return out;
}

}  // namespace

std::string format_table(const EvalReport& r, const std::string& method) {
  const auto configs = configs_in(r);
  const std::size_t method_w = std::max<std::size_t>(8, method.size() + 2), class_w = 12, cell_w = 8;
  const std::size_t group_w = 3 * cell_w;

  struct Block {
    const char* title;
    std::function<std::optional<double>(const EvalCell&)> get;
    const char* spec;
  };
  const std::vector<Block> blocks{
      {"AP_3D|R40", [](const EvalCell& c) { return c.ap3d.ap; }, "%.2f"},
      {"AP_BEV|R40", [](const EvalCell& c) { return c.ap_bev.ap; }, "%.2f"},
      {"sigma_3D", [](const EvalCell& c) { return c.sigma3d; }, "%.2f"},
  };

  std::string out;
  for (const auto& b : blocks) {
    out += std::string(b.title) + "\n";
    std::string h1 = pad("", method_w, false) + pad("", class_w, false);
    std::string h2 = pad("Method", method_w, false) + pad("Category", class_w, false);
    for (IouConfig c : configs) {
      h1 += " | " + pad(thresholds_label(r, c), group_w, false);
      h2 += " | ";
      for (const char* d : {"Easy", "Mod.", "Hard"}) h2 += pad(d, cell_w);
    }
    out += h1 + "\n" + h2 + "\n" + std::string(h2.size(), '-') + "\n";
    for (ObjectClass cls : kEvalClasses) {
      std::string row = pad(method, method_w, false) + pad(std::string(class_name(cls)), class_w, false);
      for (IouConfig c : configs) {
        row += " | ";
        for (Difficulty d : kDifficulties) row += pad(fmt(b.get(r.at(cls, d, c)), b.spec), cell_w);
      }
      out += row + "\n";
    }
    out += "\n";
  }
  return out;
}

std::string format_csv(const EvalReport& r, const std::string& method) {
  std::string out = "method,class,difficulty,iou_config,metric,value\n";
  auto line = [&](const EvalCell& c, const char* metric, std::optional<double> v) {
    std::string value;
    if (v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", *v);
      value = buf;
    }
    out += method + "," + std::string(class_name(c.cls)) + "," + std::string(to_string(c.difficulty)) + "," +
           std::string(to_string(c.iou_config)) + "," + metric + "," + value + "\n";
  };
  for (const auto& c : r.cells) {
    line(c, "ap3d", c.ap3d.ap);
    line(c, "ap_bev", c.ap_bev.ap);
    line(c, "sigma3d", c.sigma3d);
  }
  return out;
}

namespace {

nlohmann::json metric_json(const MetricResult& m) {
  nlohmann::json j;
  j["ap"] = m.ap ? nlohmann::json(*m.ap) : nlohmann::json(nullptr);
  j["counts"] = {{"gt", m.counts.gt}, {"tp", m.counts.tp}, {"fp", m.counts.fp}, {"ignored", m.counts.ignored}};
  auto curve = nlohmann::json::array();
  for (const auto& [rec, prec] : m.pr_curve) curve.push_back({rec, prec});
  j["pr_curve"] = std::move(curve);
  return j;
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& r, const std::string& method, const RunManifest& m) {
  nlohmann::json j;
  j["manifest"] = to_json(m);
  j["method"] = method;
  j["frames"] = r.frames;
  j["cells"] = nlohmann::json::array();
  for (const auto& c : r.cells) {
    j["cells"].push_back({{"class", class_name(c.cls)},
                          {"difficulty", to_string(c.difficulty)},
                          {"iou_config", to_string(c.iou_config)},
                          {"threshold", c.threshold},
                          {"ap3d", metric_json(c.ap3d)},
                          {"ap_bev", metric_json(c.ap_bev)},
                          {"sigma3d", c.sigma3d ? nlohmann::json(*c.sigma3d) : nlohmann::json(nullptr)},
                          {"sigma_images", c.sigma_images}});
  }
  return j;
}

}  // namespace slam3d
