#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <utility>

#include "slam3d/kitti_io.hpp"
#include "slam3d/tensor.hpp"

namespace slam3d {

inline constexpr Index kTargetHeight = 384;
inline constexpr Index kTargetWidth = 1280;
inline constexpr double kMinCropScale = 0.5;
inline constexpr double kMaxCropScale = 2.0;

/// Flip + crop + resize to the fixed network resolution. The crop window is
/// centred at `crop_center` (continuous pixel coordinates of the, possibly
/// flipped, source) and spans crop_scale times the source extent; it is then
/// resampled to kTargetHeight x kTargetWidth.
struct TransformSpec {
  bool hflip = false;
  Eigen::Vector2d crop_center{kTargetWidth / 2.0, kTargetHeight / 2.0};  // (cx, cy)
  double crop_scale = 1.0;
  Index source_height = kTargetHeight;
  Index source_width = kTargetWidth;
  std::uint64_t seed = 0;

  friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

/// augment=false gives no flip, the centred crop and scale 1. Otherwise the
/// draws come from `seed`: flip with p=0.5, scale uniform in
/// [kMinCropScale, kMaxCropScale], centre jittered by up to 20% of each side.
TransformSpec sample_transform(std::uint64_t seed, bool augment, Index source_height = kTargetHeight,
                               Index source_width = kTargetWidth);

using Affine2x3 = Eigen::Matrix<double, 2, 3>;

/// Maps a destination pixel index (x, y, 1) to a source pixel index (u, v)
/// using the half-pixel-centre convention.
Affine2x3 affine_matrix(const TransformSpec& spec);

/// Single-pass bilinear resampling of every plane through `dst_to_src`.
/// Taps outside the source read as zero.
template <typename Scalar>
TensorT<Scalar> warp_affine(const TensorT<Scalar>& t, const Affine2x3& dst_to_src, Index out_h, Index out_w) {
  const Shape& s = t.shape();
  TensorT<Scalar> out({s.batch, s.channels, out_h, out_w});
  auto tap = [&](const auto& plane, Index r, Index c) -> Scalar {
    return (r < 0 || c < 0 || r >= s.height || c >= s.width) ? Scalar(0) : plane(r, c);
  };
  for (Index y = 0; y < out_h; ++y)
    for (Index x = 0; x < out_w; ++x) {
      const Eigen::Vector2d src = dst_to_src * Eigen::Vector3d(double(x), double(y), 1.0);
      const double fu = std::floor(src.x()), fv = std::floor(src.y());
      if (fu < -1.0 || fv < -1.0 || fu >= double(s.width) || fv >= double(s.height)) continue;
      const auto c0 = static_cast<Index>(fu), r0 = static_cast<Index>(fv);
      const auto wx = static_cast<Scalar>(src.x() - fu), wy = static_cast<Scalar>(src.y() - fv);
      for (Index n = 0; n < s.batch; ++n)
        for (Index ch = 0; ch < s.channels; ++ch) {
          const auto plane = t.plane(n, ch);
          const Scalar a = tap(plane, r0, c0), b = tap(plane, r0, c0 + 1);
          const Scalar c = tap(plane, r0 + 1, c0), d = tap(plane, r0 + 1, c0 + 1);
          const Scalar top = a + wx * (b - a);
          const Scalar bottom = c + wx * (d - c);
          out(n, ch, y, x) = top + wy * (bottom - top);
        }
    }
  return out;
}

/// Resamples image (1x3xHxW) and prior (1x1xHxW) through the same affine map.
std::pair<Tensor, Tensor> apply(const Tensor& image, const Tensor& prior, const TransformSpec& spec);

/// Mirrors a label for a horizontal flip of an image `image_width` wide:
/// bbox2d is reflected and alpha / rotation_y map to pi - angle, wrapped to
/// [-pi, pi]. DontCare sentinels are left alone.
Label3D flip_label(const Label3D& label, double image_width);

}  // namespace slam3d
