#include "slam3d/paired_transform.hpp"

#include <numbers>

#include "slam3d/rng.hpp"

namespace slam3d {

TransformSpec sample_transform(std::uint64_t seed, bool augment, Index source_height, Index source_width) {
  TransformSpec spec;
  spec.seed = seed;
  spec.source_height = source_height;
  spec.source_width = source_width;
  spec.crop_center = {source_width / 2.0, source_height / 2.0};
  if (!augment) return spec;

  Rng rng(seed);
  spec.hflip = rng.bernoulli(0.5);
  spec.crop_scale = rng.uniform(kMinCropScale, kMaxCropScale);
  spec.crop_center.x() += rng.uniform(-0.2, 0.2) * static_cast<double>(source_width);
  spec.crop_center.y() += rng.uniform(-0.2, 0.2) * static_cast<double>(source_height);
  return spec;
}

Affine2x3 affine_matrix(const TransformSpec& spec) {
  const double sw = static_cast<double>(spec.source_width), sh = static_cast<double>(spec.source_height);
  const double tw = static_cast<double>(kTargetWidth), th = static_cast<double>(kTargetHeight);
  const double sx = spec.crop_scale * sw / tw;
  const double sy = spec.crop_scale * sh / th;
  // continuous source coordinate U = cx + (x + 0.5 - tw/2) * sx, index u = U - 0.5;
  // a flip mirrors the source first: U -> sw - U.
  Affine2x3 m = Affine2x3::Zero();
  const double ux = 0.5 * sx + spec.crop_center.x() - 0.5 * tw * sx;
  if (spec.hflip) {
    m(0, 0) = -sx;
    m(0, 2) = sw - ux - 0.5;
  } else {
    m(0, 0) = sx;
    m(0, 2) = ux - 0.5;
  }
  m(1, 1) = sy;
  m(1, 2) = 0.5 * sy + spec.crop_center.y() - 0.5 * th * sy - 0.5;
  return m;
}

std::pair<Tensor, Tensor> apply(const Tensor& image, const Tensor& prior, const TransformSpec& spec) {
  const Shape &si = image.shape(), &sp = prior.shape();
  if (si.batch != 1 || si.channels != 3 || sp.batch != 1 || sp.channels != 1 || si.height != sp.height ||
      si.width != sp.width)
    throw ShapeMismatch("paired transform wants 1x3xHxW and 1x1xHxW, got " + to_string(si) + " and " +
                        to_string(sp));
  if (si.height != spec.source_height || si.width != spec.source_width)
    throw ShapeMismatch("transform spec was sampled for a different source size than " + to_string(si));
  if (!(spec.crop_scale >= kMinCropScale && spec.crop_scale <= kMaxCropScale))
    throw RangeError("crop_scale outside [0.5, 2.0]");
  const Affine2x3 m = affine_matrix(spec);
  return {warp_affine(image, m, kTargetHeight, kTargetWidth), warp_affine(prior, m, kTargetHeight, kTargetWidth)};
}

Label3D flip_label(const Label3D& label, double image_width) {
  Label3D out = label;
  out.bbox.left = image_width - label.bbox.right;
  out.bbox.right = image_width - label.bbox.left;
  if (label.cls == ObjectClass::DontCare) return out;
  auto mirror = [](double a) {
    double r = std::numbers::pi - a;
    if (r > std::numbers::pi) r -= 2 * std::numbers::pi;
    return r;
  };
  out.alpha = mirror(label.alpha);
  out.rotation_y = mirror(label.rotation_y);
  return out;
}

}  // namespace slam3d
