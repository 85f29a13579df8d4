#include "slam3d/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "slam3d/atomic_file.hpp"
#include "slam3d/gradcheck_suite.hpp"
#include "slam3d/netpbm.hpp"
#include "slam3d/paired_transform.hpp"
#include "slam3d/pipeline.hpp"
#include "slam3d/prior_map.hpp"
#include "slam3d/report.hpp"
#include "slam3d/snapshot.hpp"

namespace slam3d {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
using Flags = std::vector<std::pair<std::string, std::string>>;

std::int64_t elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

RunManifest make_manifest(std::string command, const Flags& flags, std::vector<std::string> inputs,
                          std::uint64_t seed, Clock::time_point t0) {
  RunManifest m;
  m.command = std::move(command);
  m.config_hash = config_hash(flags);
  m.input_paths = std::move(inputs);
  m.seed = seed;
  m.wall_ms = elapsed_ms(t0);
  return m;
}

fs::path with_extension(fs::path p, const char* ext) { return p.replace_extension(ext); }

// --------------------------------------------------------------------------

struct EncodeArgs {
  std::string masks, out, table;
};

int cmd_encode_priors(const EncodeArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  if (!fs::is_directory(a.masks)) {
    err << "encode-priors: masks dir not found: " << a.masks << "\n";
    return kExitDataError;
  }
  IntensityTable table;
  if (!a.table.empty()) {
    try {
      table = parse_intensity_table(read_file(a.table));
    } catch (const std::exception& e) {
      err << "encode-priors: intensity table " << a.table << ": " << e.what() << "\n";
      return kExitDataError;
    }
  }

  std::vector<fs::path> manifests;
  for (const auto& e : fs::directory_iterator(a.masks))
    if (e.is_regular_file() && e.path().extension() == ".txt") manifests.push_back(e.path());
  std::sort(manifests.begin(), manifests.end());
  if (manifests.empty()) err << "warning: no frame manifests in " << a.masks << "\n";

  std::vector<std::pair<std::string, GrayPriorMap>> encoded;
  std::vector<std::string> failed;
  for (const auto& path : manifests) {
    const std::string frame = path.stem().string();
    try {
      auto map = encode_frame(parse_mask_manifest(read_file(path)), a.masks, table);
      if (!map) {
        err << "warning: frame " << frame << ": empty manifest, skipped\n";
        continue;
      }
      encoded.emplace_back(frame, std::move(*map));
    } catch (const std::exception& e) {
      err << "error: frame " << frame << ": " << e.what() << "\n";
      failed.push_back(frame);
    }
  }
  if (!failed.empty()) {
    err << "encode-priors: " << failed.size() << " frame(s) failed:";
    for (const auto& f : failed) err << ' ' << f;
    err << "\n";
    return kExitDataError;
  }

  fs::create_directories(a.out);
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& [frame, map] : encoded) {
    save_pgm(fs::path(a.out) / (frame + ".pgm"), map);
    frames.push_back({{"frame", frame}, {"file", frame + ".pgm"}, {"width", map.width()}, {"height", map.height()}});
  }
  const Flags flags{{"masks", a.masks}, {"out", a.out}, {"intensity-table", a.table}};
  std::vector<std::string> inputs{a.masks};
  if (!a.table.empty()) inputs.push_back(a.table);
  nlohmann::json j;
  j["frames"] = std::move(frames);
  j["intensity_table"] = {{"Car", table[PriorClass::Car]},
                          {"Pedestrian", table[PriorClass::Pedestrian]},
                          {"Cyclist", table[PriorClass::Cyclist]}};
  j["manifest"] = to_json(make_manifest("encode-priors", flags, inputs, 0, t0));
  write_file_atomic(fs::path(a.out) / "manifest.json", j.dump(2) + "\n");
  out << "encoded " << encoded.size() << " frame(s) into " << a.out << "\n";
  return kExitOk;
}

// --------------------------------------------------------------------------

struct FuseArgs {
  std::string image, prior, strategy = "multiply", point = "after_dla", out, timing;
  std::uint64_t seed = 0;
  bool align = false, augment = false;
};

Tensor load_image(const fs::path& p) {
  if (p.extension() == ".ppm") {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open " + p.string());
    return rgb_to_tensor(read_pixmap(in));
  }
  return load_snapshot(p);
}

Tensor load_prior(const fs::path& p) {
  if (p.extension() == ".pgm") return map_to_tensor(load_pgm(p));
  return load_snapshot(p);
}

int cmd_fuse(const FuseArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  FusionConfig cfg;
  cfg.strategy = parse_strategy(a.strategy);
  cfg.point = parse_point(a.point);
  cfg.seed = a.seed;

  Tensor image, prior;
  try {
    image = load_image(a.image);
    prior = load_prior(a.prior);
  } catch (const std::exception& e) {
    err << "fuse: " << e.what() << "\n";
    return kExitDataError;
  }
  const Shape si = image.shape(), sp = prior.shape();
  if (si.batch != 1 || si.channels != 3 || sp.batch != 1 || sp.channels != 1 || !si.same_spatial(sp)) {
    err << "fuse: image " << to_string(si) << " and prior " << to_string(sp) << " are not aligned\n";
    return kExitDataError;
  }
  if (a.align || a.augment) {
    const auto spec = sample_transform(a.seed, a.augment, si.height, si.width);
    std::tie(image, prior) = apply(image, prior, spec);
  }

  PipelineOutput result;
  try {
    result = FusionPipeline(cfg).run(image, prior);
  } catch (const ShapeError& e) {
    err << "fuse: " << e.what() << "\n";
    return kExitDataError;
  }
  save_snapshot(a.out, result.head_3d);

  const Flags flags{{"image", a.image},         {"prior", a.prior},
                    {"strategy", a.strategy},   {"point", a.point},
                    {"seed", std::to_string(a.seed)}, {"align", a.align ? "1" : "0"},
                    {"augment", a.augment ? "1" : "0"}};
  nlohmann::json j = nlohmann::json::parse(timing_to_json(result.timing));
  j["fuse_calls"] = result.fuse_calls;
  j["config"] = {{"strategy", a.strategy}, {"point", a.point}, {"out_channels", cfg.out_channels}};
  j["manifest"] = to_json(make_manifest("fuse", flags, {a.image, a.prior}, a.seed, t0));
  const fs::path timing = a.timing.empty() ? fs::path(a.out + ".timing.json") : fs::path(a.timing);
  write_file_atomic(timing, j.dump(2) + "\n");
  out << "wrote " << a.out << " " << to_string(result.head_3d.shape()) << ", " << result.fuse_calls
      << " fuse call(s)\n";
  return kExitOk;
}

// --------------------------------------------------------------------------

struct EvalArgs {
  std::string gt, det, iou_config = "both", out, method = "method";
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = Clock::now();
  std::vector<IouConfig> configs;
  if (a.iou_config != "secondary") configs.push_back(IouConfig::Primary);
  if (a.iou_config != "primary") configs.push_back(IouConfig::Secondary);

  EvalReport report;
  try {
    report = evaluate(a.gt, a.det, EvalConfig{}, configs);
  } catch (const FrameSetMismatch& e) {
    err << "eval: " << e.what() << "\n";
    return kExitDataError;
  } catch (const Error& e) {
    err << "eval: " << e.what() << "\n";
    return kExitDataError;
  }

  const Flags flags{{"gt", a.gt}, {"det", a.det}, {"iou-config", a.iou_config}, {"method", a.method},
                    {"out", a.out}};
  const auto manifest = make_manifest("eval", flags, {a.gt, a.det}, 0, t0);
  const std::string table = format_table(report, a.method);
  write_file_atomic(a.out, report_to_json(report, a.method, manifest).dump(2) + "\n");
  write_file_atomic(with_extension(a.out, ".txt"), table);
  write_file_atomic(with_extension(a.out, ".csv"), format_csv(report, a.method));
  out << table;
  return kExitOk;
}

// --------------------------------------------------------------------------

struct GradArgs {
  int trials = 3;
  std::uint64_t seed = 0;
  bool corrupt = false;
};

int cmd_gradcheck(const GradArgs& a, std::ostream& out) {
  const auto t0 = Clock::now();
  constexpr double kTolerance = 1e-4;
  const auto r = run_gradcheck_suite(a.trials, a.seed, a.corrupt);
  bool ok = true;
  for (const auto& [name, e] : r.worst) {
    char line[128];
    const bool pass = e < kTolerance;
    ok = ok && pass;
    std::snprintf(line, sizeof line, "%-20s %.3e  %s\n", name.c_str(), e, pass ? "ok" : "FAIL");
    out << line;
  }
  const Flags flags{{"trials", std::to_string(a.trials)}, {"seed", std::to_string(a.seed)},
                    {"corrupt-backward", a.corrupt ? "1" : "0"}};
  out << to_json(make_manifest("gradcheck", flags, {}, a.seed, t0)).dump() << "\n";
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Segmentation-prior fusion and 3D detection evaluation"};
  app.require_subcommand(1);

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode-priors", "Encode per-frame instance masks into gray prior maps");
  encode->add_option("--masks", enc.masks, "Directory of <frame>.txt manifests and mask PGMs")->required();
  encode->add_option("--out", enc.out, "Output directory")->required();
  encode->add_option("--intensity-table", enc.table, "Lines of '<class> <gray value>'");

  FuseArgs fz;
  auto* fuse_cmd = app.add_subcommand("fuse", "Run the toy pipeline with prior fusion");
  fuse_cmd->add_option("--image", fz.image, "RGB .ppm or 1x3xHxW snapshot")->required();
  fuse_cmd->add_option("--prior", fz.prior, "Gray .pgm or 1x1xHxW snapshot")->required();
  fuse_cmd->add_option("--strategy", fz.strategy)->check(CLI::IsMember({"multiply", "concat", "attention"}));
  fuse_cmd->add_option("--point", fz.point)->check(CLI::IsMember({"after_dla", "during_dla", "heads_only"}));
  fuse_cmd->add_option("--seed", fz.seed);
  fuse_cmd->add_option("--out", fz.out, "Snapshot of the fused 3D-head features")->required();
  fuse_cmd->add_option("--timing", fz.timing, "Timing report (default <out>.timing.json)");
  fuse_cmd->add_flag("--align", fz.align, "Resample both inputs to 384x1280 first");
  fuse_cmd->add_flag("--augment", fz.augment, "Seeded flip/crop before fusing (implies --align)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate detections against ground truth");
  eval_cmd->add_option("--gt", ev.gt, "Ground-truth dir (label_2/ or flat)")->required();
  eval_cmd->add_option("--det", ev.det, "Detection dir (data/ or flat)")->required();
  eval_cmd->add_option("--iou-config", ev.iou_config)->check(CLI::IsMember({"primary", "secondary", "both"}));
  eval_cmd->add_option("--out", ev.out, "JSON report; .txt and .csv are written beside it")->required();
  eval_cmd->add_option("--method", ev.method, "Method name used in tables");

  GradArgs gc;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every backward pass");
  grad_cmd->add_option("--trials", gc.trials)->check(CLI::PositiveNumber);
  grad_cmd->add_option("--seed", gc.seed);
  grad_cmd->add_flag("--corrupt-backward", gc.corrupt)->group("");  // test hook

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help
    err << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*encode) return cmd_encode_priors(enc, out, err);
    if (*fuse_cmd) return cmd_fuse(fz, out, err);
    if (*eval_cmd) return cmd_eval(ev, out, err);
    if (*grad_cmd) return cmd_gradcheck(gc, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace slam3d
