#include "slam3d/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace slam3d {

namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

std::array<Eigen::Vector2d, 4> BevBox::corners() const {
  // Heading unit vector for a rotation of `yaw` about the camera y axis,
  // expressed in (x, z).
  const Eigen::Vector2d along(std::cos(yaw), -std::sin(yaw));
  const Eigen::Vector2d across(std::sin(yaw), std::cos(yaw));
  const Eigen::Vector2d l = 0.5 * length * along, w = 0.5 * width * across;
  std::array<Eigen::Vector2d, 4> c = {center + l + w, center - l + w, center - l - w, center + l - w};
  if (cross(c[1] - c[0], c[2] - c[0]) < 0) std::reverse(c.begin(), c.end());
  return c;
}

BevBox bev_box(const Label3D& label) {
  return {{label.location.x(), label.location.z()}, label.length(), label.width(), label.rotation_y};
}

double signed_area(const Polygon& poly) {
  double s = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * s;
}

Polygon clip_convex(const Polygon& subject, const Polygon& clip) {
  Polygon out = subject;
  for (std::size_t e = 0, n = clip.size(); e < n && !out.empty(); ++e) {
    const Eigen::Vector2d& p0 = clip[e];
    const Eigen::Vector2d edge = clip[(e + 1) % n] - p0;
    const Polygon in = std::move(out);
    out.clear();
    for (std::size_t i = 0, m = in.size(); i < m; ++i) {
      const Eigen::Vector2d& cur = in[i];
      const Eigen::Vector2d& nxt = in[(i + 1) % m];
      const double dc = cross(edge, cur - p0);
      const double dn = cross(edge, nxt - p0);
      if (dc >= 0) out.push_back(cur);
      if ((dc >= 0) != (dn >= 0)) {
        const double t = dc / (dc - dn);
        out.push_back(cur + t * (nxt - cur));
      }
    }
  }
  return out;
}

double bev_intersection_area(const BevBox& a, const BevBox& b) {
  const auto ca = a.corners(), cb = b.corners();
  // Cheap reject on bounding circles.
  const double ra = 0.5 * std::hypot(a.length, a.width), rb = 0.5 * std::hypot(b.length, b.width);
  if ((a.center - b.center).norm() > ra + rb) return 0.0;
  const Polygon clipped = clip_convex(Polygon(ca.begin(), ca.end()), Polygon(cb.begin(), cb.end()));
  if (clipped.size() < 3) return 0.0;
  return std::max(0.0, signed_area(clipped));
}

double bev_iou(const BevBox& a, const BevBox& b) {
  const double inter = bev_intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

VerticalExtent vertical_extent(const Label3D& label) {
  return {label.location.y() - label.height(), label.location.y()};
}

double iou_3d(const Label3D& a, const Label3D& b) {
  const auto va = vertical_extent(a), vb = vertical_extent(b);
  const double dy = std::max(0.0, std::min(va.bottom, vb.bottom) - std::max(va.top, vb.top));
  if (dy <= 0.0) return 0.0;
  const double inter = bev_intersection_area(bev_box(a), bev_box(b)) * dy;
  const double vol_a = a.height() * a.width() * a.length();
  const double vol_b = b.height() * b.width() * b.length();
  const double uni = vol_a + vol_b - inter;
  if (!(uni > 0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double bev_iou(const Label3D& a, const Label3D& b) { return bev_iou(bev_box(a), bev_box(b)); }

double box2d_intersection(const Box2D& a, const Box2D& b) {
  const double w = std::min(a.right, b.right) - std::max(a.left, b.left);
  const double h = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
  return (w > 0 && h > 0) ? w * h : 0.0;
}

double box2d_iou(const Box2D& a, const Box2D& b) {
  const double inter = box2d_intersection(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

}  // namespace slam3d
