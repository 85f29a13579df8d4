#include "slam3d/eval.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "slam3d/parallel.hpp"

namespace slam3d {

namespace {

std::size_t class_slot(ObjectClass cls) {
  for (std::size_t i = 0; i < kEvalClasses.size(); ++i)
    if (kEvalClasses[i] == cls) return i;
  throw RangeError("class " + std::string(class_name(cls)) + " is not evaluated");
}

}  // namespace

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Moderate: return "moderate";
    case Difficulty::Hard: return "hard";
    case Difficulty::Ignored: return "ignored";
  }
  return "?";
}

std::string_view to_string(IouConfig c) { return c == IouConfig::Primary ? "primary" : "secondary"; }

std::string_view to_string(Metric m) { return m == Metric::Ap3d ? "ap3d" : "ap_bev"; }

double EvalConfig::threshold(IouConfig config, ObjectClass cls) const {
  return iou_thresholds[static_cast<std::size_t>(config)][class_slot(cls)];
}

Difficulty assign_difficulty(const Label3D& gt, const EvalConfig& cfg) {
  const double height = gt.bbox.height();
  for (Difficulty d : kDifficulties) {
    const auto& t = cfg.difficulty[static_cast<std::size_t>(d)];
    if (height >= t.min_height_px && gt.occlusion >= 0 && gt.occlusion <= t.max_occlusion &&
        gt.truncation <= t.max_truncation)
      return d;
  }
  return Difficulty::Ignored;
}

std::optional<ObjectClass> neighbor_class(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::Car: return ObjectClass::Van;
    case ObjectClass::Pedestrian: return ObjectClass::PersonSitting;
    default: return std::nullopt;
  }
}

IouFn metric_iou(Metric m) {
  if (m == Metric::Ap3d) return [](const Label3D& a, const Label3D& b) { return iou_3d(a, b); };
  return [](const Label3D& a, const Label3D& b) { return bev_iou(a, b); };
}

MatchResult match_detections(std::span<const Label3D> gts, std::span<const Detection> dets, ObjectClass cls,
                             Difficulty difficulty, const IouFn& iou, double threshold, const EvalConfig& cfg) {
  std::vector<std::size_t> counted, absorbing, dontcare;
  const auto neighbor = neighbor_class(cls);
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const Label3D& g = gts[i];
    if (g.cls == cls) {
      const Difficulty level = assign_difficulty(g, cfg);
      (level != Difficulty::Ignored && level <= difficulty ? counted : absorbing).push_back(i);
    } else if (neighbor && g.cls == *neighbor) {
      absorbing.push_back(i);
    } else if (g.cls == ObjectClass::DontCare) {
      dontcare.push_back(i);
    }
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (dets[i].cls == cls) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  MatchResult r;
  r.num_gt = static_cast<int>(counted.size());
  std::vector<bool> taken(counted.size(), false);
  for (std::size_t di : order) {
    const Detection& d = dets[di];
    double best = -1.0;
    std::size_t best_slot = counted.size();
    for (std::size_t k = 0; k < counted.size(); ++k) {
      if (taken[k]) continue;
      const double v = iou(d, gts[counted[k]]);
      if (v >= threshold && v > best) {
        best = v;
        best_slot = k;
      }
    }
    if (best_slot < counted.size()) {
      taken[best_slot] = true;
      ++r.tp;
      r.matched_ious.push_back(best);
      r.ranked.push_back({di, d.score, Outcome::TruePositive, best});
      continue;
    }
    double absorbed = -1.0;
    for (std::size_t gi : absorbing) absorbed = std::max(absorbed, iou(d, gts[gi]));
    bool ignore = absorbed >= threshold;
    if (!ignore && d.bbox.area() > 0) {
      for (std::size_t gi : dontcare)
        if (box2d_intersection(d.bbox, gts[gi].bbox) / d.bbox.area() > cfg.dontcare_overlap) ignore = true;
    }
    if (ignore) {
      ++r.ignored;
      r.ranked.push_back({di, d.score, Outcome::Ignored, std::max(absorbed, 0.0)});
    } else {
      ++r.fp;
      r.ranked.push_back({di, d.score, Outcome::FalsePositive, 0.0});
    }
  }
  return r;
}

ApResult ap_r40(std::span<const bool> tp_flags, int num_gt, int recall_points) {
  if (num_gt <= 0) throw EmptyGT("AP is undefined without ground truth");
  if (recall_points < 1) throw RangeError("recall_points must be positive");
  // best_from[k]: highest precision at any rank whose recall >= k / N.
  // Recall tp / num_gt >= k / N  <=>  tp * N >= k * num_gt, kept in integers.
  std::vector<double> best_from(static_cast<std::size_t>(recall_points) + 1, 0.0);
  long tp = 0;
  for (std::size_t i = 0; i < tp_flags.size(); ++i) {
    if (tp_flags[i]) ++tp;
    const double precision = static_cast<double>(tp) / static_cast<double>(i + 1);
    const long reached = std::min<long>(recall_points, tp * recall_points / num_gt);
    for (long k = 1; k <= reached; ++k)
      best_from[static_cast<std::size_t>(k)] = std::max(best_from[static_cast<std::size_t>(k)], precision);
  }
  ApResult r;
  double sum = 0.0;
  for (int k = 1; k <= recall_points; ++k) {
    const double p = best_from[static_cast<std::size_t>(k)];
    r.pr_curve.emplace_back(static_cast<double>(k) / recall_points, p);
    sum += p;
  }
  r.ap = 100.0 * sum / recall_points;
  return r;
}

double prediction_variance(std::span<const double> aps) {
  if (aps.size() < 2) throw InsufficientData("variance needs at least two images with ground truth");
  const double n = static_cast<double>(aps.size());
  const double mean = std::accumulate(aps.begin(), aps.end(), 0.0) / n;
  double sq = 0.0;
  for (double v : aps) sq += (v - mean) * (v - mean);
  return sq / (n - 1.0);
}

const EvalCell& EvalReport::at(ObjectClass cls, Difficulty d, IouConfig c) const {
  for (const auto& cell : cells)
    if (cell.cls == cls && cell.difficulty == d && cell.iou_config == c) return cell;
  throw RangeError("report has no cell for " + std::string(class_name(cls)) + "/" + std::string(to_string(d)) +
                   "/" + std::string(to_string(c)));
}

namespace {

struct Ranked {
  double score;
  std::size_t frame;
  std::size_t index;
  bool tp;
};

std::span<const bool> as_flags(const std::vector<char>& v) {
  return {reinterpret_cast<const bool*>(v.data()), v.size()};
}

struct FrameMatches {
  MatchResult ap3d;
  MatchResult ap_bev;
};

void pool_metric(const std::vector<const MatchResult*>& per_frame, int recall_points, MetricResult& out,
                 std::vector<double>* per_image_aps) {
  std::vector<Ranked> pooled;
  for (std::size_t f = 0; f < per_frame.size(); ++f) {
    const MatchResult& m = *per_frame[f];
    out.counts.gt += m.num_gt;
    out.counts.tp += m.tp;
    out.counts.fp += m.fp;
    out.counts.ignored += m.ignored;
    std::vector<char> frame_flags;  // not vector<bool>: needs contiguous bools for the span
    for (const auto& o : m.ranked) {
      if (o.outcome == Outcome::Ignored) continue;
      const bool tp = o.outcome == Outcome::TruePositive;
      pooled.push_back({o.score, f, o.det_index, tp});
      frame_flags.push_back(tp);
    }
    if (per_image_aps && m.num_gt > 0)
      per_image_aps->push_back(ap_r40(as_flags(frame_flags), m.num_gt, recall_points).ap);
  }
  std::sort(pooled.begin(), pooled.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.index < b.index;
  });
  if (out.counts.gt == 0) return;
  std::vector<char> flags;
  for (const auto& r : pooled) flags.push_back(r.tp);
  auto ap = ap_r40(as_flags(flags), out.counts.gt, recall_points);
  out.ap = ap.ap;
  out.pr_curve = std::move(ap.pr_curve);
}

}  // namespace

EvalReport evaluate_frames(std::vector<FrameData> frames, const EvalConfig& cfg, std::span<const IouConfig> configs) {
  std::sort(frames.begin(), frames.end(), [](const FrameData& a, const FrameData& b) { return a.id < b.id; });
  EvalReport report;
  report.frames = frames.size();
  const auto iou3d = metric_iou(Metric::Ap3d), ioubev = metric_iou(Metric::ApBev);

  for (ObjectClass cls : kEvalClasses)
    for (IouConfig config : configs)
      for (Difficulty diff : kDifficulties) {
        const double thr = cfg.threshold(config, cls);
        std::vector<FrameMatches> matches(frames.size());
        parallel_for(frames.size(), [&](std::size_t f) {
          matches[f].ap3d = match_detections(frames[f].gt, frames[f].det, cls, diff, iou3d, thr, cfg);
          matches[f].ap_bev = match_detections(frames[f].gt, frames[f].det, cls, diff, ioubev, thr, cfg);
        });
        EvalCell cell{cls, diff, config, thr, {}, {}, std::nullopt, 0};
        std::vector<const MatchResult*> m3d, mbev;
        for (const auto& m : matches) {
          m3d.push_back(&m.ap3d);
          mbev.push_back(&m.ap_bev);
        }
        std::vector<double> per_image;
        pool_metric(m3d, cfg.recall_points, cell.ap3d, &per_image);
        pool_metric(mbev, cfg.recall_points, cell.ap_bev, nullptr);
        cell.sigma_images = static_cast<int>(per_image.size());
        if (per_image.size() >= 2) cell.sigma3d = prediction_variance(per_image);
        report.cells.push_back(std::move(cell));
      }
  return report;
}

namespace {

std::filesystem::path pick_dir(const std::filesystem::path& root, const char* sub) {
  const auto nested = root / sub;
  return std::filesystem::is_directory(nested) ? nested : root;
}

std::set<std::string> frame_ids(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::set<std::string> ids;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".txt") ids.insert(e.path().stem().string());
  return ids;
}

}  // namespace

std::vector<FrameData> load_frames(const std::filesystem::path& gt_root, const std::filesystem::path& det_root) {
  const auto gt_dir = pick_dir(gt_root, "label_2");
  const auto det_dir = pick_dir(det_root, "data");
  const auto gt_ids = frame_ids(gt_dir), det_ids = frame_ids(det_dir);
  // an empty detection dir means "nothing detected", not a mismatch
  const bool no_dets = det_ids.empty();
  if (!no_dets && gt_ids != det_ids) {
    std::string msg = "frame sets differ:";
    int listed = 0;
    for (const auto& id : gt_ids)
      if (!det_ids.count(id) && listed++ < 10) msg += " missing detections for " + id + ";";
    for (const auto& id : det_ids)
      if (!gt_ids.count(id) && listed++ < 20) msg += " no ground truth for " + id + ";";
    throw FrameSetMismatch(msg);
  }

  std::vector<FrameData> frames(gt_ids.begin(), gt_ids.end());
  const std::vector<std::string> ids(gt_ids.begin(), gt_ids.end());
  std::vector<std::string> errors(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) frames[i].id = ids[i];
  parallel_for(ids.size(), [&](std::size_t i) {
    try {
      frames[i].gt = load_labels(gt_dir / (ids[i] + ".txt"));
    } catch (const Error& e) {
      errors[i] += "frame " + ids[i] + " (labels): " + e.what() + "\n";
    }
    if (no_dets) return;
    try {
      frames[i].det = load_detections(det_dir / (ids[i] + ".txt"));
    } catch (const Error& e) {
      errors[i] += "frame " + ids[i] + " (detections): " + e.what() + "\n";
    }
  });
  std::string all;
  for (const auto& e : errors) all += e;
  if (!all.empty()) throw ParseErrors(all);
  return frames;
}

EvalReport evaluate(const std::filesystem::path& gt_dir, const std::filesystem::path& det_dir, const EvalConfig& cfg,
                    std::span<const IouConfig> configs) {
  return evaluate_frames(load_frames(gt_dir, det_dir), cfg, configs);
}

}  // namespace slam3d
