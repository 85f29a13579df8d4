#include "slam3d/prior_map.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "slam3d/atomic_file.hpp"
#include "slam3d/error.hpp"

namespace slam3d {

namespace {

std::vector<std::string> words(std::string_view line) {
  std::istringstream is{std::string(line)};
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    auto w = words(line);
    if (w.empty() || w[0].front() == '#') continue;
    fn(line_no, w);
  }
}

long parse_long(const std::string& s, const char* what) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw NumericError(std::string("bad ") + what + " '" + s + "'");
  return v;
}

}  // namespace

std::string_view prior_class_name(PriorClass c) {
  switch (c) {
    case PriorClass::Car: return "Car";
    case PriorClass::Pedestrian: return "Pedestrian";
    case PriorClass::Cyclist: return "Cyclist";
  }
  return "?";
}

PriorClass parse_prior_class(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "car") return PriorClass::Car;
  if (lower == "pedestrian") return PriorClass::Pedestrian;
  if (lower == "cyclist") return PriorClass::Cyclist;
  throw RangeError("unknown prior class '" + std::string(name) + "'");
}

IntensityTable parse_intensity_table(std::string_view text) {
  IntensityTable table;
  for_each_line(text, [&](std::size_t line_no, const std::vector<std::string>& w) {
    if (w.size() != 2) throw FieldCountError("intensity table line " + std::to_string(line_no) + ": expected <class> <value>");
    const long v = parse_long(w[1], "intensity");
    if (v < 1 || v > 255) throw RangeError("intensity for " + w[0] + " must be in 1..255");
    table[parse_prior_class(w[0])] = static_cast<std::uint8_t>(v);
  });
  const auto& v = table.values;
  if (v[0] == v[1] || v[0] == v[2] || v[1] == v[2]) throw RangeError("intensity table values must be distinct");
  return table;
}

GrayPriorMap encode_semantic_map(std::span<const InstanceMask> masks, Index width, Index height,
                                 const IntensityTable& table) {
  if (width < 1 || height < 1) throw DimensionMismatch("prior map size must be positive");
  // Per-class winner: the highest-priority class covering each pixel.
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> winner =
      Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Constant(height, width, -1);
  for (const auto& m : masks) {
    if (m.mask.rows() != height || m.mask.cols() != width)
      throw DimensionMismatch("mask is " + std::to_string(m.mask.cols()) + "x" + std::to_string(m.mask.rows()) +
                              ", expected " + std::to_string(width) + "x" + std::to_string(height));
    const int rank = static_cast<int>(m.cls);
    winner = (m.mask.array() != 0).select(winner.cwiseMax(rank), winner);
  }
  GrayPriorMap out{GrayImage::Zero(height, width), table};
  out.pixels = winner.unaryExpr([&](int r) -> std::uint8_t {
    return r < 0 ? std::uint8_t{0} : table[static_cast<PriorClass>(r)];
  });
  return out;
}

void write_pgm(std::ostream& sink, const GrayPriorMap& map) { write_graymap(sink, map.pixels); }

GrayPriorMap read_pgm(std::istream& source) { return {read_graymap(source, true), {}}; }

void save_pgm(const std::filesystem::path& path, const GrayPriorMap& map) {
  std::ostringstream os(std::ios::binary);
  write_pgm(os, map);
  write_file_atomic(path, os.str());
}

GrayPriorMap load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_pgm(in);
}

Tensor map_to_tensor(const GrayPriorMap& map) {
  Tensor t({1, 1, map.height(), map.width()});
  t.plane(0, 0) = map.pixels.cast<double>() / 255.0;
  return t;
}

MaskManifest parse_mask_manifest(std::string_view text) {
  MaskManifest m;
  for_each_line(text, [&](std::size_t line_no, const std::vector<std::string>& w) {
    const std::string where = "manifest line " + std::to_string(line_no) + ": ";
    if (w[0] == "size") {
      if (w.size() != 3) throw FieldCountError(where + "expected size <width> <height>");
      const long width = parse_long(w[1], "width"), height = parse_long(w[2], "height");
      if (width < 1 || height < 1) throw RangeError(where + "size must be positive");
      m.size = std::array<Index, 2>{width, height};
      return;
    }
    if (w.size() < 2 || w.size() > 3) throw FieldCountError(where + "expected <class> <mask-file> [source]");
    m.entries.push_back({parse_prior_class(w[0]), w[1], w.size() == 3 ? w[2] : std::string{}});
  });
  return m;
}

std::optional<GrayPriorMap> encode_frame(const MaskManifest& manifest, const std::filesystem::path& mask_dir,
                                         const IntensityTable& table) {
  std::vector<InstanceMask> masks;
  masks.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    const auto path = mask_dir / e.mask_file;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open mask " + path.string());
    masks.push_back({e.cls, read_graymap(in, false), e.source});
  }
  Index width = 0, height = 0;
  if (manifest.size) {
    width = (*manifest.size)[0];
    height = (*manifest.size)[1];
  } else if (!masks.empty()) {
    width = masks.front().mask.cols();
    height = masks.front().mask.rows();
  } else {
    return std::nullopt;
  }
  return encode_semantic_map(masks, width, height, table);
}

}  // namespace slam3d
