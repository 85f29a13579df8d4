#include <doctest.h>

#include <cmath>

#include "slam3d/geometry.hpp"
#include "slam3d/rng.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace slam3d;

namespace {

BevBox make(double x, double z, double l, double w, double yaw) {
  BevBox b;
  b.center = {x, z};
  b.length = l;
  b.width = w;
  b.yaw = yaw;
  return b;
}

BevBox random_box(Rng& rng) {
  return make(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(0.5, 6), rng.uniform(0.5, 6),
              rng.uniform(-M_PI, M_PI));
}

}  // namespace

TEST_CASE("polygon helpers") {
  const Polygon sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(signed_area(sq) == 1.0);
  const Polygon rev{{0, 0}, {0, 1}, {1, 1}, {1, 0}};
  CHECK(signed_area(rev) == -1.0);
  const Polygon shifted{{0.5, 0.5}, {1.5, 0.5}, {1.5, 1.5}, {0.5, 1.5}};
  CHECK(signed_area(clip_convex(shifted, sq)) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(clip_convex(Polygon{{5, 5}, {6, 5}, {6, 6}}, sq).empty());
  for (double yaw : {0.0, 0.3, -2.0}) {
    const auto c = make(1, 2, 3, 1.5, yaw).corners();
    CHECK(signed_area(Polygon(c.begin(), c.end())) == doctest::Approx(4.5).epsilon(1e-12));
  }
}

TEST_CASE("bev_iou anchors") {
  const BevBox unit = make(0, 0, 1, 1, 0);
  CHECK(std::abs(bev_iou(unit, unit) - 1.0) <= 1e-9);
  CHECK(bev_iou(unit, make(10, 0, 1, 1, 0)) == 0.0);
  CHECK(std::abs(bev_iou(unit, make(0.5, 0, 1, 1, 0)) - 1.0 / 3.0) <= 1e-9);
  CHECK(std::abs(oracle::raster_bev_iou(unit, make(0.5, 0, 1, 1, 0)) - 1.0 / 3.0) <= 5e-3);

  // unit square against itself yawed 45 degrees: regular octagon of area 2(sqrt2 - 1)
  const double octagon = 2 * (std::sqrt(2.0) - 1);
  const double analytic = octagon / (2 - octagon);
  const BevBox turned = make(0, 0, 1, 1, M_PI / 4);
  const double raster = oracle::raster_bev_iou(unit, turned);
  REQUIRE(std::abs(raster - analytic) <= 5e-3);  // the closed form is confirmed by the raster first
  CHECK(std::abs(bev_iou(unit, turned) - analytic) <= 1e-3);
  CHECK(std::abs(bev_intersection_area(unit, turned) - octagon) <= 1e-9);
}

TEST_CASE("bev_iou matches the raster oracle on random pairs") {
  Rng rng(500);
  int overlapping = 0;
  for (int i = 0; i < 500; ++i) {
    BevBox a = random_box(rng), b = random_box(rng);
    if (i % 2) b.center = a.center + Eigen::Vector2d(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const double got = bev_iou(a, b);
    CHECK(std::abs(got - oracle::raster_bev_iou(a, b)) <= 5e-3);
    overlapping += got > 0;
  }
  CHECK(overlapping > 200);
}

TEST_CASE("bev_iou symmetry and rigid-motion invariance") {
  Rng rng(501);
  for (int i = 0; i < 200; ++i) {
    BevBox a = random_box(rng), b = random_box(rng);
    b.center = a.center + Eigen::Vector2d(rng.uniform(-3, 3), rng.uniform(-3, 3));
    const double ab = bev_iou(a, b);
    CHECK(std::abs(ab - bev_iou(b, a)) <= 1e-12);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    const double th = rng.uniform(-M_PI, M_PI);
    const Eigen::Vector2d t(rng.uniform(-50, 50), rng.uniform(-50, 50));
    // yaw turns the heading (cos, -sin) in (x, z); rotate centres the same way
    Eigen::Matrix2d rot;
    rot << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
    BevBox ma = a, mb = b;
    ma.center = rot * a.center + t;
    mb.center = rot * b.center + t;
    ma.yaw += th;
    mb.yaw += th;
    CHECK(std::abs(bev_iou(ma, mb) - ab) <= 1e-9);
  }
}

TEST_CASE("iou_3d") {
  using fixture::box;
  const Label3D a = box(ObjectClass::Car, 0, 20, 4, 1.6, 1.5);
  CHECK(std::abs(iou_3d(a, a) - 1.0) <= 1e-12);
  Label3D up = a;
  up.location.y() -= 2.0;
  CHECK(iou_3d(a, up) == 0.0);
  Label3D half = a;
  half.location.y() -= 0.75;
  CHECK(std::abs(iou_3d(a, half) - 1.0 / 3.0) <= 1e-9);

  Rng rng(502);
  for (int i = 0; i < 100; ++i) {
    Label3D p = box(ObjectClass::Car, rng.uniform(-2, 2), rng.uniform(18, 22), rng.uniform(1, 5), rng.uniform(1, 3),
                    1.0, rng.uniform(-M_PI, M_PI));
    Label3D q = box(ObjectClass::Car, rng.uniform(-2, 2), rng.uniform(18, 22), rng.uniform(1, 5), rng.uniform(1, 3),
                    1.0, rng.uniform(-M_PI, M_PI));
    CHECK(std::abs(iou_3d(p, q) - bev_iou(p, q)) <= 1e-9);
    // vertical offset against the axis-aligned closed form
    q.rotation_y = p.rotation_y = (i % 2) ? 0.0 : M_PI / 2;
    q.location.y() += rng.uniform(-1.2, 1.2);
    CHECK(std::abs(iou_3d(p, q) - oracle::aligned_iou_3d(p, q, false)) <= 1e-9);
    CHECK(std::abs(bev_iou(p, q) - oracle::aligned_iou_3d(p, q, true)) <= 1e-9);
  }
}

TEST_CASE("2D boxes") {
  const Box2D a{0, 0, 10, 10}, b{5, 5, 15, 15};
  CHECK(box2d_intersection(a, b) == 25.0);
  CHECK(box2d_iou(a, b) == doctest::Approx(25.0 / 175.0));
  CHECK(box2d_intersection(a, Box2D{20, 20, 30, 30}) == 0.0);
}
