#pragma once
// Reference implementations the tests compare against. Written from the
// definitions, deliberately slow and loop-based, sharing no code with the
// library beyond plain data types.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "slam3d/geometry.hpp"
#include "slam3d/kitti_io.hpp"
#include "slam3d/tensor.hpp"

namespace oracle {

using slam3d::Index;
using slam3d::Tensor;

// ---------------------------------------------------------------------------
// scanline raster of two rotated rectangles

struct Quad {
  std::array<double, 4> x, z;
};

inline Quad quad(const slam3d::BevBox& b) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  const double hl = b.length / 2, hw = b.width / 2;
  const double lx[4] = {hl, -hl, -hl, hl}, wz[4] = {hw, hw, -hw, -hw};
  Quad q;
  for (int i = 0; i < 4; ++i) {
    q.x[i] = b.center.x() + lx[i] * c + wz[i] * s;
    q.z[i] = b.center.y() - lx[i] * s + wz[i] * c;
  }
  return q;
}

// x-range of a convex quad on the line z = zz; empty when lo > hi
inline std::pair<double, double> row_span(const Quad& q, double zz) {
  double lo = INFINITY, hi = -INFINITY;
  for (int i = 0; i < 4; ++i) {
    const int j = (i + 1) % 4;
    const double z0 = q.z[i], z1 = q.z[j];
    if ((zz < std::min(z0, z1)) || (zz > std::max(z0, z1)) || z0 == z1) continue;
    const double t = (zz - z0) / (z1 - z0);
    const double xx = q.x[i] + t * (q.x[j] - q.x[i]);
    lo = std::min(lo, xx);
    hi = std::max(hi, xx);
  }
  return {lo, hi};
}

inline long centres_in(double lo, double hi, double x0, double dx, int n) {
  if (!(lo <= hi)) return 0;
  // pixel i covers centre x0 + (i + 0.5) dx
  const double a = std::ceil((lo - x0) / dx - 0.5), b = std::floor((hi - x0) / dx - 0.5);
  const long first = std::max<long>(0, static_cast<long>(a)), last = std::min<long>(n - 1, static_cast<long>(b));
  return last >= first ? last - first + 1 : 0;
}

/// IoU by counting pixel centres of an n x n grid spanning the joint
/// bounding region.
inline double raster_bev_iou(const slam3d::BevBox& a, const slam3d::BevBox& b, int n = 2000) {
  const Quad qa = quad(a), qb = quad(b);
  double x0 = INFINITY, x1 = -INFINITY, z0 = INFINITY, z1 = -INFINITY;
  for (const Quad* q : {&qa, &qb})
    for (int i = 0; i < 4; ++i) {
      x0 = std::min(x0, q->x[i]);
      x1 = std::max(x1, q->x[i]);
      z0 = std::min(z0, q->z[i]);
      z1 = std::max(z1, q->z[i]);
    }
  const double dx = (x1 - x0) / n, dz = (z1 - z0) / n;
  long ca = 0, cb = 0, ci = 0;
  for (int r = 0; r < n; ++r) {
    const double zz = z0 + (r + 0.5) * dz;
    const auto [la, ha] = row_span(qa, zz);
    const auto [lb, hb] = row_span(qb, zz);
    ca += centres_in(la, ha, x0, dx, n);
    cb += centres_in(lb, hb, x0, dx, n);
    ci += centres_in(std::max(la, lb), std::min(ha, hb), x0, dx, n);
  }
  const double uni = static_cast<double>(ca + cb - ci);
  return uni > 0 ? static_cast<double>(ci) / uni : 0.0;
}

// ---------------------------------------------------------------------------
// axis-aligned 3D IoU for boxes with yaw 0 or +-pi/2

inline double aligned_iou_3d(const slam3d::Label3D& a, const slam3d::Label3D& b, bool bev_only) {
  auto extent = [](const slam3d::Label3D& l) {
    const bool turned = std::abs(std::sin(l.rotation_y)) > 0.5;
    const double ex = (turned ? l.dims.y() : l.dims.z()) / 2;  // length runs along x at yaw 0
    const double ez = (turned ? l.dims.z() : l.dims.y()) / 2;
    return std::array<double, 6>{l.location.x() - ex, l.location.x() + ex, l.location.z() - ez,
                                 l.location.z() + ez, l.location.y() - l.dims.x(), l.location.y()};
  };
  const auto ea = extent(a), eb = extent(b);
  double inter = 1, va = 1, vb = 1;
  const int axes = bev_only ? 2 : 3;
  for (int k = 0; k < axes; ++k) {
    const double lo = std::max(ea[2 * k], eb[2 * k]), hi = std::min(ea[2 * k + 1], eb[2 * k + 1]);
    inter *= std::max(0.0, hi - lo);
    va *= ea[2 * k + 1] - ea[2 * k];
    vb *= eb[2 * k + 1] - eb[2 * k];
  }
  return inter / (va + vb - inter);
}

// ---------------------------------------------------------------------------
// PR by sweeping score thresholds, devkit style

struct Scored {
  double score;
  bool tp;
};

/// For each distinct score t: TP and FP among detections with score >= t.
/// Precision at recall level k/n is the best precision over thresholds whose
/// recall reaches it. Scores must be distinct.
inline double threshold_sweep_ap(std::vector<Scored> dets, int num_gt, int n = 40) {
  std::vector<double> thresholds;
  for (const auto& d : dets) thresholds.push_back(d.score);
  std::vector<double> best(n + 1, 0.0);
  for (double t : thresholds) {
    int tp = 0, fp = 0;
    for (const auto& d : dets)
      if (d.score >= t) (d.tp ? tp : fp) += 1;
    const double recall = static_cast<double>(tp) / num_gt;
    const double precision = static_cast<double>(tp) / (tp + fp);
    for (int k = 1; k <= n; ++k)
      if (recall >= static_cast<double>(k) / n - 1e-12) best[k] = std::max(best[k], precision);
  }
  double sum = 0;
  for (int k = 1; k <= n; ++k) sum += best[k];
  return 100.0 * sum / n;
}

// ---------------------------------------------------------------------------
// tensor kernels, scalar loops

inline Tensor conv1x1(const Tensor& t, const Eigen::MatrixXd& w, const Eigen::VectorXd& bias) {
  const auto s = t.shape();
  Tensor out({s.batch, w.rows(), s.height, s.width});
  for (Index n = 0; n < s.batch; ++n)
    for (Index o = 0; o < w.rows(); ++o)
      for (Index y = 0; y < s.height; ++y)
        for (Index x = 0; x < s.width; ++x) {
          double acc = bias(o);
          for (Index i = 0; i < s.channels; ++i) acc += w(o, i) * t(n, i, y, x);
          out(n, o, y, x) = acc;
        }
  return out;
}

inline Tensor upsample(const Tensor& t, Index oh, Index ow) {
  const auto s = t.shape();
  Tensor out({s.batch, s.channels, oh, ow});
  auto src = [](Index dst, Index in, Index outn) {
    const double v = (dst + 0.5) * static_cast<double>(in) / static_cast<double>(outn) - 0.5;
    return std::clamp(v, 0.0, static_cast<double>(in - 1));
  };
  for (Index n = 0; n < s.batch; ++n)
    for (Index c = 0; c < s.channels; ++c)
      for (Index y = 0; y < oh; ++y)
        for (Index x = 0; x < ow; ++x) {
          const double fy = src(y, s.height, oh), fx = src(x, s.width, ow);
          const Index y0 = static_cast<Index>(std::floor(fy)), x0 = static_cast<Index>(std::floor(fx));
          const Index y1 = std::min(y0 + 1, s.height - 1), x1 = std::min(x0 + 1, s.width - 1);
          const double wy = fy - y0, wx = fx - x0;
          out(n, c, y, x) = (1 - wy) * ((1 - wx) * t(n, c, y0, x0) + wx * t(n, c, y0, x1)) +
                            wy * ((1 - wx) * t(n, c, y1, x0) + wx * t(n, c, y1, x1));
        }
  return out;
}

struct Moments {
  double mean, var;
};

inline Moments moments(const Tensor& t, Index n, Index c) {
  const auto s = t.shape();
  double sum = 0;
  for (Index y = 0; y < s.height; ++y)
    for (Index x = 0; x < s.width; ++x) sum += t(n, c, y, x);
  const double mean = sum / static_cast<double>(s.height * s.width);
  double sq = 0;
  for (Index y = 0; y < s.height; ++y)
    for (Index x = 0; x < s.width; ++x) sq += (t(n, c, y, x) - mean) * (t(n, c, y, x) - mean);
  return {mean, sq / static_cast<double>(s.height * s.width)};
}

}  // namespace oracle
