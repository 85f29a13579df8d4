#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slam3d/error.hpp"

namespace slam3d {

enum class ObjectClass { Car, Van, Truck, Pedestrian, PersonSitting, Cyclist, Tram, Misc, DontCare };

/// KITTI spelling ("Person_sitting", "DontCare", ...).
std::string_view class_name(ObjectClass c);
/// Exact KITTI spelling; unknown names are rejected with RangeError.
ObjectClass parse_class_name(std::string_view name);

struct Box2D {
  double left = 0;
  double top = 0;
  double right = 0;
  double bottom = 0;

  double width() const { return right - left; }
  double height() const { return bottom - top; }
  double area() const { return width() * height(); }
};

/// One ground-truth object. dims is (height, width, length); location is the
/// bottom-center of the box in the camera frame (x right, y down, z forward).
struct Label3D {
  ObjectClass cls = ObjectClass::DontCare;
  double truncation = 0;
  int occlusion = 0;
  double alpha = 0;
  Box2D bbox;
  Eigen::Vector3d dims = Eigen::Vector3d::Zero();
  Eigen::Vector3d location = Eigen::Vector3d::Zero();
  double rotation_y = 0;

  double height() const { return dims.x(); }
  double width() const { return dims.y(); }
  double length() const { return dims.z(); }
};

struct Detection : Label3D {
  double score = 0;
};

/// Camera-2 projection matrix from a KITTI calibration file.
struct Calib {
  Eigen::Matrix<double, 3, 4> p2 = Eigen::Matrix<double, 3, 4>::Zero();
};

Label3D parse_label_line(std::string_view line);
Detection parse_detection_line(std::string_view line);
Calib parse_calib(std::string_view text_block);

/// Checks the record invariants; throws RangeError naming the first violation.
void validate(const Label3D& label);

std::string format_label(const Label3D& label);
std::string format_detection(const Detection& det);
std::string format_calib(const Calib& calib);

/// Whole-file parsers. Blank lines are skipped; errors carry the 1-based line.
std::vector<Label3D> parse_label_file(std::string_view text);
std::vector<Detection> parse_detection_file(std::string_view text);

std::vector<Label3D> load_labels(const std::filesystem::path& path);
std::vector<Detection> load_detections(const std::filesystem::path& path);
Calib load_calib(const std::filesystem::path& path);

}  // namespace slam3d
