#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "slam3d/kitti_io.hpp"

namespace fixture {

namespace fs = std::filesystem;
using slam3d::Detection;
using slam3d::Label3D;
using slam3d::ObjectClass;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path = fs::temp_directory_path() /
           ("slam3d_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  fs::path operator/(const std::string& s) const { return path / s; }
};

inline void write_text(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

inline Label3D box(ObjectClass cls, double x, double z, double l = 4.0, double w = 1.6, double h = 1.5,
                   double ry = 0.0, double px_height = 50, int occ = 0, double trunc = 0.0) {
  Label3D g;
  g.cls = cls;
  g.truncation = trunc;
  g.occlusion = occ;
  g.alpha = 0;
  g.bbox = {100, 100, 150, 100 + px_height};
  g.dims = {h, w, l};
  g.location = {x, 1.5, z};
  g.rotation_y = ry;
  return g;
}

inline Detection det(const Label3D& g, double score) {
  Detection d;
  static_cast<Label3D&>(d) = g;
  d.score = score;
  return d;
}

inline std::string labels_text(const std::vector<Label3D>& ls) {
  std::string s;
  for (const auto& l : ls) s += slam3d::format_label(l);
  return s;
}

inline std::string dets_text(const std::vector<Detection>& ds) {
  std::string s;
  for (const auto& d : ds) s += slam3d::format_detection(d);
  return s;
}

// ---------------------------------------------------------------------------
// Randomised evaluation fixtures with axis-aligned boxes so the oracle can
// compute IoU in closed form.

struct Frame {
  std::string id;
  std::vector<Label3D> gt;
  std::vector<Detection> det;
};

inline std::vector<Frame> random_frames(std::uint64_t seed, int max_frames = 5, int max_objects = 6) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  const ObjectClass classes[] = {ObjectClass::Car, ObjectClass::Pedestrian, ObjectClass::Cyclist,
                                 ObjectClass::Van, ObjectClass::PersonSitting};
  std::vector<Frame> frames(pick(1, max_frames));
  double score_base = 0.0;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    char id[8];
    std::snprintf(id, sizeof id, "%06zu", f);
    frames[f].id = id;
    const int n = pick(0, max_objects);
    for (int i = 0; i < n; ++i) {
      const ObjectClass cls = classes[pick(0, 4)];
      const bool small = cls != ObjectClass::Car && cls != ObjectClass::Van;
      const double l = small ? uni(0.5, 1.8) : uni(3.0, 4.5), w = small ? uni(0.5, 0.8) : uni(1.5, 1.9);
      const double ry = pick(0, 1) ? 0.0 : M_PI / 2;
      Label3D g = box(cls, uni(-6, 6), uni(5, 30), l, w, small ? 1.7 : 1.5, ry, uni(15, 70), pick(0, 3),
                      uni(0.0, 0.6));
      frames[f].gt.push_back(g);
      // 0-2 detections near this object, sometimes of a neighbouring class
      const int copies = pick(0, 2);
      for (int c = 0; c < copies; ++c) {
        Label3D d = g;
        if (cls == ObjectClass::Van) d.cls = ObjectClass::Car;
        if (cls == ObjectClass::PersonSitting) d.cls = ObjectClass::Pedestrian;
        d.location.x() += uni(-0.4, 0.4) * w;
        d.location.z() += uni(-0.4, 0.4) * l;
        d.location.y() += uni(-0.3, 0.3);
        d.occlusion = 0;
        d.truncation = 0;
        frames[f].det.push_back(det(d, 0));
      }
    }
    const int noise = pick(0, 2);
    for (int i = 0; i < noise; ++i) {
      const ObjectClass cls = classes[pick(0, 2)];
      frames[f].det.push_back(det(box(cls, uni(-6, 6), uni(5, 30), uni(0.6, 4), uni(0.6, 1.8)), 0));
    }
  }
  // distinct scores, shuffled across frames
  std::vector<Detection*> all;
  for (auto& fr : frames)
    for (auto& d : fr.det) all.push_back(&d);
  std::shuffle(all.begin(), all.end(), rng);
  for (std::size_t i = 0; i < all.size(); ++i) all[i]->score = 0.05 + 0.9 * (i + 1 + score_base) / (all.size() + 1);
  return frames;
}

inline void write_frames(const std::vector<Frame>& frames, const fs::path& gt_dir, const fs::path& det_dir) {
  fs::create_directories(gt_dir);
  fs::create_directories(det_dir);
  for (const auto& f : frames) {
    write_text(gt_dir / (f.id + ".txt"), labels_text(f.gt));
    write_text(det_dir / (f.id + ".txt"), dets_text(f.det));
  }
}

// Independent matcher + threshold sweep; yields the expected AP (percent)
// for one cell or nullopt without GT.
inline int oracle_level(const Label3D& g) {
  const double h = g.bbox.bottom - g.bbox.top;
  if (h >= 40 && g.occlusion <= 0 && g.truncation <= 0.15) return 0;
  if (h >= 25 && g.occlusion <= 1 && g.truncation <= 0.30) return 1;
  if (h >= 25 && g.occlusion <= 2 && g.truncation <= 0.50) return 2;
  return 3;
}

inline std::optional<double> oracle_ap(const std::vector<Frame>& frames, ObjectClass cls, int difficulty,
                                       double thr, bool bev) {
  std::vector<oracle::Scored> pooled;
  int num_gt = 0;
  for (const auto& f : frames) {
    std::vector<const Label3D*> counted, absorb;
    for (const auto& g : f.gt) {
      const bool neighbour = (cls == ObjectClass::Car && g.cls == ObjectClass::Van) ||
                             (cls == ObjectClass::Pedestrian && g.cls == ObjectClass::PersonSitting);
      if (g.cls == cls && oracle_level(g) <= difficulty) counted.push_back(&g);
      else if (g.cls == cls || neighbour) absorb.push_back(&g);
    }
    num_gt += static_cast<int>(counted.size());
    std::vector<const Detection*> ds;
    for (const auto& d : f.det)
      if (d.cls == cls) ds.push_back(&d);
    std::sort(ds.begin(), ds.end(), [](auto* a, auto* b) { return a->score > b->score; });
    std::vector<bool> used(counted.size());
    for (const auto* d : ds) {
      int best = -1;
      double best_iou = 0;
      for (std::size_t k = 0; k < counted.size(); ++k) {
        const double v = oracle::aligned_iou_3d(*d, *counted[k], bev);
        if (!used[k] && v >= thr && v > best_iou) best = static_cast<int>(k), best_iou = v;
      }
      if (best >= 0) {
        used[best] = true;
        pooled.push_back({d->score, true});
        continue;
      }
      bool ignored = false;
      for (const auto* g : absorb) ignored = ignored || oracle::aligned_iou_3d(*d, *g, bev) >= thr;
      if (!ignored) pooled.push_back({d->score, false});
    }
  }
  if (num_gt == 0) return std::nullopt;
  return oracle::threshold_sweep_ap(pooled, num_gt);
}

}  // namespace fixture
