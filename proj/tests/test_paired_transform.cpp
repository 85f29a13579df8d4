#include <doctest.h>

#include "slam3d/paired_transform.hpp"
#include "slam3d/rng.hpp"

using namespace slam3d;

namespace {

std::pair<Tensor, Tensor> random_pair(Rng& rng, Index h = kTargetHeight, Index w = kTargetWidth) {
  Tensor img({1, 3, h, w}), prior({1, 1, h, w});
  for (auto& v : img.data()) v = rng.uniform();
  for (auto& v : prior.data()) v = rng.uniform();
  return {img, prior};
}

Index argmax(const Tensor& t, Index channel) {
  const auto plane = t.plane(0, channel);
  Index best = 0;
  for (Index i = 1; i < plane.size(); ++i)
    if (plane.data()[i] > plane.data()[best]) best = i;
  return best;
}

}  // namespace

TEST_CASE("sample_transform") {
  for (std::uint64_t seed : {0ull, 7ull, 123456789ull}) {
    const auto s = sample_transform(seed, false);
    CHECK_FALSE(s.hflip);
    CHECK(s.crop_scale == 1.0);
    CHECK(s.crop_center.x() == kTargetWidth / 2.0);
    CHECK(s.crop_center.y() == kTargetHeight / 2.0);
  }
  CHECK(sample_transform(7, true) == sample_transform(7, true));

  int differing = 0;
  const auto base = sample_transform(1000, true);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = sample_transform(seed, true);
    CHECK(s.crop_scale >= kMinCropScale);
    CHECK(s.crop_scale <= kMaxCropScale);
    if (!(s == base) && (s.hflip != base.hflip || s.crop_scale != base.crop_scale || s.crop_center != base.crop_center))
      ++differing;
  }
  CHECK(differing >= 99);

  int flips = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) flips += sample_transform(seed, true).hflip;
  CHECK(flips > 150);
  CHECK(flips < 250);
}

TEST_CASE("apply") {
  Rng rng(31);
  SUBCASE("identity spec") {
    const auto [img, prior] = random_pair(rng);
    const auto [oi, op] = apply(img, prior, sample_transform(0, false));
    CHECK(max_abs_diff(oi, img) <= 1e-9);
    CHECK(max_abs_diff(op, prior) <= 1e-9);
  }
  SUBCASE("flip twice is the identity") {
    const auto [img, prior] = random_pair(rng);
    auto spec = sample_transform(0, false);
    spec.hflip = true;
    const auto [fi, fp] = apply(img, prior, spec);
    CHECK(fi(0, 1, 10, 0) == img(0, 1, 10, kTargetWidth - 1));
    const auto [bi, bp] = apply(fi, fp, spec);
    CHECK(max_abs_diff(bi, img) <= 1e-6);
    CHECK(max_abs_diff(bp, prior) <= 1e-6);
  }
  SUBCASE("other source sizes resample to the target") {
    const auto [img, prior] = random_pair(rng, 100, 300);
    const auto [oi, op] = apply(img, prior, sample_transform(5, true, 100, 300));
    CHECK(oi.shape() == Shape{1, 3, kTargetHeight, kTargetWidth});
    CHECK(op.shape() == Shape{1, 1, kTargetHeight, kTargetWidth});
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(apply(Tensor({1, 3, 10, 10}), Tensor({1, 1, 10, 11}), sample_transform(0, false, 10, 10)),
                    ShapeMismatch);
    CHECK_THROWS_AS(apply(Tensor({1, 2, 10, 10}), Tensor({1, 1, 10, 10}), sample_transform(0, false, 10, 10)),
                    ShapeMismatch);
  }
  SUBCASE("deterministic") {
    const auto [img, prior] = random_pair(rng, 64, 96);
    const auto spec = sample_transform(99, true, 64, 96);
    const auto a = apply(img, prior, spec), b = apply(img, prior, spec);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
  }
}

TEST_CASE("a bright pixel lands at the same place in image and prior") {
  Rng rng(404);
  const Index h = 96, w = 320;
  int visible = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = sample_transform(rng.next(), true, h, w);
    // choose the source pixel under a random output pixel so it stays in view
    const Affine2x3 m = affine_matrix(spec);
    const Eigen::Vector2d src = m * Eigen::Vector3d(double(rng.integer(0, kTargetWidth - 1)),
                                                    double(rng.integer(0, kTargetHeight - 1)), 1.0);
    const Index r = std::clamp<Index>(static_cast<Index>(std::lround(src.y())), 0, h - 1);
    const Index c = std::clamp<Index>(static_cast<Index>(std::lround(src.x())), 0, w - 1);
    Tensor img({1, 3, h, w}), prior({1, 1, h, w});
    for (Index ch = 0; ch < 3; ++ch) img(0, ch, r, c) = 1.0;
    prior(0, 0, r, c) = 1.0;
    const auto [oi, op] = apply(img, prior, spec);
    const Index want = argmax(op, 0);
    for (Index ch = 0; ch < 3; ++ch) CHECK(argmax(oi, ch) == want);
    visible += op.plane(0, 0).maxCoeff() > 0;
  }
  CHECK(visible == 20);
}

TEST_CASE("flip_label") {
  Label3D l;
  l.cls = ObjectClass::Car;
  l.bbox = {100, 50, 160, 90};
  l.alpha = 0.3;
  l.rotation_y = -2.5;
  l.dims = {1.5, 1.6, 4.0};
  l.location = {2.0, 1.5, 20.0};
  const Label3D f = flip_label(l, 1280);
  CHECK(f.bbox.left == 1120);
  CHECK(f.bbox.right == 1180);
  CHECK(f.bbox.top == 50);
  CHECK(std::abs(f.alpha - (M_PI - 0.3)) <= 1e-12);
  CHECK(std::abs(f.rotation_y - (M_PI + 2.5 - 2 * M_PI)) <= 1e-12);
  const Label3D back = flip_label(f, 1280);
  CHECK(std::abs(back.bbox.left - l.bbox.left) <= 1e-9);
  CHECK(std::abs(back.alpha - l.alpha) <= 1e-9);
  CHECK(std::abs(back.rotation_y - l.rotation_y) <= 1e-9);

  Label3D dc;
  dc.cls = ObjectClass::DontCare;
  dc.alpha = -10;
  dc.rotation_y = -10;
  dc.bbox = {0, 0, 10, 10};
  const Label3D fdc = flip_label(dc, 100);
  CHECK(fdc.alpha == -10);
  CHECK(fdc.rotation_y == -10);
}
