#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slam3d/geometry.hpp"
#include "slam3d/kitti_io.hpp"

namespace slam3d {

enum class Difficulty { Easy = 0, Moderate = 1, Hard = 2, Ignored = 3 };
enum class IouConfig { Primary = 0, Secondary = 1 };
enum class Metric { Ap3d, ApBev };

inline constexpr std::array<ObjectClass, 3> kEvalClasses{ObjectClass::Car, ObjectClass::Pedestrian,
                                                         ObjectClass::Cyclist};
inline constexpr std::array<Difficulty, 3> kDifficulties{Difficulty::Easy, Difficulty::Moderate, Difficulty::Hard};
inline constexpr std::array<IouConfig, 2> kIouConfigs{IouConfig::Primary, IouConfig::Secondary};

std::string_view to_string(Difficulty d);
std::string_view to_string(IouConfig c);
std::string_view to_string(Metric m);

struct DifficultyThresholds {
  double min_height_px;
  int max_occlusion;
  double max_truncation;
};

struct EvalConfig {
  /// Easy, Moderate, Hard.
  std::array<DifficultyThresholds, 3> difficulty{{{40.0, 0, 0.15}, {25.0, 1, 0.30}, {25.0, 2, 0.50}}};
  /// Per IoU config, thresholds for Car, Pedestrian, Cyclist.
  std::array<std::array<double, 3>, 2> iou_thresholds{{{0.7, 0.5, 0.5}, {0.5, 0.3, 0.3}}};
  int recall_points = 40;
  /// A detection is ignored if more than this fraction of its 2D box lies in
  /// a DontCare region.
  double dontcare_overlap = 0.5;

  double threshold(IouConfig config, ObjectClass cls) const;
};

/// Easiest level whose thresholds the label meets, or Ignored.
Difficulty assign_difficulty(const Label3D& gt, const EvalConfig& cfg = {});

/// Van for Car, Person_sitting for Pedestrian; nullopt otherwise.
std::optional<ObjectClass> neighbor_class(ObjectClass cls);

using IouFn = std::function<double(const Label3D&, const Label3D&)>;
IouFn metric_iou(Metric m);

enum class Outcome { TruePositive, FalsePositive, Ignored };

struct DetectionOutcome {
  std::size_t det_index;  // into the input detection list
  double score;
  Outcome outcome;
  double iou;  // with the matched GT (TP) or absorbing GT (ignored); 0 otherwise
};

struct MatchResult {
  int num_gt = 0;  // GTs that count toward recall
  int tp = 0;
  int fp = 0;
  int ignored = 0;
  std::vector<double> matched_ious;
  std::vector<DetectionOutcome> ranked;  // detections of the class, by descending score
};

/// Greedy single-image matching for one class and difficulty. Detections are
/// visited by descending score (ties by input index); each takes the unmatched
/// countable GT of highest IoU >= threshold. A detection that cannot match but
/// overlaps a harder / neighbour-class GT at >= threshold, or sits mostly
/// inside a DontCare box, is ignored; anything else is a false positive.
MatchResult match_detections(std::span<const Label3D> gts, std::span<const Detection> dets, ObjectClass cls,
                             Difficulty difficulty, const IouFn& iou, double threshold,
                             const EvalConfig& cfg = {});

struct ApResult {
  double ap = 0.0;  // percent
  std::vector<std::pair<double, double>> pr_curve;  // (recall point, interpolated precision)
};

/// AP over `recall_points` equally spaced recall levels k/N, k = 1..N, with
/// precision interpolated as the best precision at any recall >= the level.
/// `tp_flags` is the ranked list of non-ignored detections.
ApResult ap_r40(std::span<const bool> tp_flags, int num_gt, int recall_points = 40);

/// Sample variance (n - 1) of per-image AP values.
double prediction_variance(std::span<const double> per_image_aps);

// ---------------------------------------------------------------------------

struct FrameData {
  std::string id;
  std::vector<Label3D> gt;
  std::vector<Detection> det;
};

struct CellCounts {
  int gt = 0;
  int tp = 0;
  int fp = 0;
  int ignored = 0;
};

struct MetricResult {
  std::optional<double> ap;  // absent when the cell has no GT
  std::vector<std::pair<double, double>> pr_curve;
  CellCounts counts;
};

struct EvalCell {
  ObjectClass cls;
  Difficulty difficulty;
  IouConfig iou_config;
  double threshold;
  MetricResult ap3d;
  MetricResult ap_bev;
  std::optional<double> sigma3d;  // absent with fewer than two images holding GT
  int sigma_images = 0;
};

struct EvalReport {
  std::size_t frames = 0;
  std::vector<EvalCell> cells;  // class-major, then IoU config, then difficulty

  const EvalCell& at(ObjectClass cls, Difficulty d, IouConfig c) const;
};

/// Frames are processed in id order, so the report does not depend on the
/// order they are supplied in.
EvalReport evaluate_frames(std::vector<FrameData> frames, const EvalConfig& cfg = {},
                           std::span<const IouConfig> configs = kIouConfigs);

/// Reads `<frame>.txt` label files from gt_dir/label_2 (or gt_dir itself)
/// and detection files from det_dir/data (or det_dir itself). The two frame
/// sets must match (FrameSetMismatch) unless the detection dir holds no
/// files at all, which scores every frame with no detections. Parse failures are collected across
/// all frames and raised together as ParseErrors.
std::vector<FrameData> load_frames(const std::filesystem::path& gt_dir, const std::filesystem::path& det_dir);

EvalReport evaluate(const std::filesystem::path& gt_dir, const std::filesystem::path& det_dir,
                    const EvalConfig& cfg = {}, std::span<const IouConfig> configs = kIouConfigs);

}  // namespace slam3d
