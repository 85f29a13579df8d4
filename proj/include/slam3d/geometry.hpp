#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

#include "slam3d/kitti_io.hpp"

namespace slam3d {

/// Ground-plane footprint of a 3D box: centre (x, z), length along the
/// heading, width across it, heading angle about the camera y axis.
struct BevBox {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double length = 1.0;
  double width = 1.0;
  double yaw = 0.0;

  double area() const { return length * width; }
  /// Corners in counter-clockwise order in the (x, z) plane.
  std::array<Eigen::Vector2d, 4> corners() const;
};

BevBox bev_box(const Label3D& label);

using Polygon = std::vector<Eigen::Vector2d>;

/// Shoelace area; positive for counter-clockwise vertex order.
double signed_area(const Polygon& poly);

/// Sutherland-Hodgman: clips `subject` against every edge of the convex,
/// counter-clockwise `clip` polygon.
Polygon clip_convex(const Polygon& subject, const Polygon& clip);

double bev_intersection_area(const BevBox& a, const BevBox& b);
double bev_iou(const BevBox& a, const BevBox& b);

/// Vertical extent of a KITTI box: location.y is the bottom face, y points
/// down, so the box spans [y - height, y].
struct VerticalExtent {
  double top;
  double bottom;
};
VerticalExtent vertical_extent(const Label3D& label);

/// Volume IoU of two yaw-only boxes: footprint intersection times the
/// overlap of vertical extents.
double iou_3d(const Label3D& a, const Label3D& b);
double bev_iou(const Label3D& a, const Label3D& b);

/// Axis-aligned 2D box IoU and intersection area (pixels).
double box2d_intersection(const Box2D& a, const Box2D& b);
double box2d_iou(const Box2D& a, const Box2D& b);

}  // namespace slam3d
