#include "slam3d/kitti_io.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "slam3d/atomic_file.hpp"

namespace slam3d {

namespace {

constexpr std::array<std::string_view, 9> kClassNames = {
    "Car", "Van", "Truck", "Pedestrian", "Person_sitting", "Cyclist", "Tram", "Misc", "DontCare"};

// Angles are written with 6 decimals, so a value at +-pi may come back a
// hair outside the closed interval.
constexpr double kAngleSlack = 1e-5;

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::string quoted(std::string_view s) { return "'" + std::string(s) + "'"; }

double parse_real(std::string_view token, std::string_view field) {
  std::string_view t = token;
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw NumericError("cannot parse " + std::string(field) + " from " + quoted(token));
  if (!std::isfinite(v)) throw NumericError(std::string(field) + " is not finite: " + quoted(token));
  return v;
}

int parse_integral(std::string_view token, std::string_view field) {
  const double v = parse_real(token, field);
  if (v != std::floor(v) || std::abs(v) > 1e6)
    throw NumericError(std::string(field) + " is not an integer: " + quoted(token));
  return static_cast<int>(v);
}

Label3D parse_label_tokens(const std::vector<std::string_view>& tok) {
  Label3D l;
  l.cls = parse_class_name(tok[0]);
  l.truncation = parse_real(tok[1], "truncation");
  l.occlusion = parse_integral(tok[2], "occlusion");
  l.alpha = parse_real(tok[3], "alpha");
  l.bbox = {parse_real(tok[4], "bbox.left"), parse_real(tok[5], "bbox.top"),
            parse_real(tok[6], "bbox.right"), parse_real(tok[7], "bbox.bottom")};
  l.dims = {parse_real(tok[8], "height"), parse_real(tok[9], "width"), parse_real(tok[10], "length")};
  l.location = {parse_real(tok[11], "x"), parse_real(tok[12], "y"), parse_real(tok[13], "z")};
  l.rotation_y = parse_real(tok[14], "rotation_y");
  validate(l);
  return l;
}

std::string format_fields(const Label3D& l) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%s %.6f %d %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.6f",
                class_name(l.cls).data(), l.truncation, l.occlusion, l.alpha, l.bbox.left, l.bbox.top,
                l.bbox.right, l.bbox.bottom, l.dims.x(), l.dims.y(), l.dims.z(), l.location.x(),
                l.location.y(), l.location.z(), l.rotation_y);
  return buf;
}

template <typename Record, typename LineParser>
std::vector<Record> parse_lines(std::string_view text, LineParser parse) {
  std::vector<Record> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (split_ws(line).empty()) continue;
    try {
      out.push_back(parse(line));
    } catch (const FieldCountError& e) {
      throw FieldCountError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const NumericError& e) {
      throw NumericError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const RangeError& e) {
      throw RangeError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::string_view class_name(ObjectClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

ObjectClass parse_class_name(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i)
    if (kClassNames[i] == name) return static_cast<ObjectClass>(i);
  throw RangeError("unknown object class " + quoted(name));
}

void validate(const Label3D& l) {
  if (!(l.bbox.right >= l.bbox.left)) throw RangeError("bbox right < left");
  if (!(l.bbox.bottom >= l.bbox.top)) throw RangeError("bbox bottom < top");
  if (l.cls == ObjectClass::DontCare) return;

  if (!(l.truncation >= 0.0 && l.truncation <= 1.0))
    throw RangeError("truncation " + std::to_string(l.truncation) + " outside [0,1]");
  if (l.occlusion < 0 || l.occlusion > 3)
    throw RangeError("occlusion " + std::to_string(l.occlusion) + " outside {0,1,2,3}");
  constexpr double lim = std::numbers::pi + kAngleSlack;
  if (std::abs(l.alpha) > lim) throw RangeError("alpha outside [-pi,pi]");
  if (std::abs(l.rotation_y) > lim) throw RangeError("rotation_y outside [-pi,pi]");
  if (!(l.dims.array() > 0.0).all()) throw RangeError("3D dimensions must be positive");
}

Label3D parse_label_line(std::string_view line) {
  const auto tok = split_ws(line);
  if (tok.size() != 15)
    throw FieldCountError("label line has " + std::to_string(tok.size()) + " fields, expected 15");
  return parse_label_tokens(tok);
}

Detection parse_detection_line(std::string_view line) {
  auto tok = split_ws(line);
  if (tok.size() != 16)
    throw FieldCountError("detection line has " + std::to_string(tok.size()) + " fields, expected 16");
  const double score = parse_real(tok[15], "score");
  tok.pop_back();
  Detection d;
  static_cast<Label3D&>(d) = parse_label_tokens(tok);
  d.score = score;
  return d;
}

Calib parse_calib(std::string_view block) {
  while (!block.empty()) {
    const auto nl = block.find('\n');
    const std::string_view line = block.substr(0, nl);
    block = nl == std::string_view::npos ? std::string_view{} : block.substr(nl + 1);
    auto tok = split_ws(line);
    if (tok.empty() || tok[0] != "P2:") continue;
    if (tok.size() != 13)
      throw NumericError("P2 has " + std::to_string(tok.size() - 1) + " values, expected 12");
    Calib c;
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 4; ++k) c.p2(r, k) = parse_real(tok[1 + 4 * r + k], "P2");
    if (!(c.p2(0, 0) > 0.0 && c.p2(1, 1) > 0.0)) throw RangeError("P2 focal lengths must be positive");
    return c;
  }
  throw MissingKeyError("calibration block has no P2: line");
}

std::string format_label(const Label3D& label) { return format_fields(label) + "\n"; }

std::string format_detection(const Detection& det) {
  char buf[64];
  std::snprintf(buf, sizeof buf, " %.6f\n", det.score);
  return format_fields(det) + buf;
}

std::string format_calib(const Calib& calib) {
  std::string out = "P2:";
  char buf[32];
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 4; ++k) {
      std::snprintf(buf, sizeof buf, " %.12e", calib.p2(r, k));
      out += buf;
    }
  return out + "\n";
}

std::vector<Label3D> parse_label_file(std::string_view text) {
  return parse_lines<Label3D>(text, parse_label_line);
}

std::vector<Detection> parse_detection_file(std::string_view text) {
  return parse_lines<Detection>(text, parse_detection_line);
}

std::vector<Label3D> load_labels(const std::filesystem::path& path) {
  return parse_label_file(read_file(path));
}

std::vector<Detection> load_detections(const std::filesystem::path& path) {
  return parse_detection_file(read_file(path));
}

Calib load_calib(const std::filesystem::path& path) { return parse_calib(read_file(path)); }

}  // namespace slam3d
