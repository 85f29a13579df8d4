#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slam3d/netpbm.hpp"
#include "slam3d/tensor.hpp"

namespace slam3d {

/// Categories that carry a prior, in ascending overlap priority: where masks
/// of different classes overlap the later enumerator wins.
enum class PriorClass : std::uint8_t { Car = 0, Pedestrian = 1, Cyclist = 2 };

std::string_view prior_class_name(PriorClass c);
/// Accepts "Car", "Pedestrian", "Cyclist" in any letter case.
PriorClass parse_prior_class(std::string_view name);

/// Gray value painted for each class; background is always 0.
struct IntensityTable {
  std::array<std::uint8_t, 3> values{85, 170, 255};

  std::uint8_t operator[](PriorClass c) const { return values[static_cast<std::size_t>(c)]; }
  std::uint8_t& operator[](PriorClass c) { return values[static_cast<std::size_t>(c)]; }
  friend bool operator==(const IntensityTable&, const IntensityTable&) = default;
};

/// `<class> <value>` per line; classes not listed keep their defaults.
/// Values must be non-zero and pairwise distinct.
IntensityTable parse_intensity_table(std::string_view text);

struct InstanceMask {
  PriorClass cls = PriorClass::Car;
  GrayImage mask;  // non-zero = covered
  std::string source;
};

struct GrayPriorMap {
  GrayImage pixels;
  IntensityTable table;

  Index width() const { return pixels.cols(); }
  Index height() const { return pixels.rows(); }
};

/// Paints the class-wise semantic map. Same-class masks union; across classes
/// Cyclist > Pedestrian > Car regardless of list order.
GrayPriorMap encode_semantic_map(std::span<const InstanceMask> masks, Index width, Index height,
                                 const IntensityTable& table = {});

void write_pgm(std::ostream& sink, const GrayPriorMap& map);
GrayPriorMap read_pgm(std::istream& source);
void save_pgm(const std::filesystem::path& path, const GrayPriorMap& map);
GrayPriorMap load_pgm(const std::filesystem::path& path);

/// 1x1xHxW tensor with values pixel / 255.
Tensor map_to_tensor(const GrayPriorMap& map);

// ---------------------------------------------------------------------------
// Per-frame mask manifests (`<frame>.txt` in the masks directory):
//   size <width> <height>            optional
//   <class> <mask-file> [source]     one per instance, path relative to the dir

struct MaskManifestEntry {
  PriorClass cls;
  std::filesystem::path mask_file;
  std::string source;
};

struct MaskManifest {
  std::optional<std::array<Index, 2>> size;  // width, height
  std::vector<MaskManifestEntry> entries;
};

MaskManifest parse_mask_manifest(std::string_view text);

/// Loads every mask of a manifest and encodes the frame. Returns nullopt for
/// a manifest with no instances and no size line.
std::optional<GrayPriorMap> encode_frame(const MaskManifest& manifest, const std::filesystem::path& mask_dir,
                                         const IntensityTable& table = {});

}  // namespace slam3d
