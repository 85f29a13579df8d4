#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "slam3d/prior_map.hpp"
#include "slam3d/rng.hpp"
#include "support/fixtures.hpp"

using namespace slam3d;

namespace {

InstanceMask block(PriorClass cls, Index w, Index h, Index r0, Index c0, Index size) {
  InstanceMask m{cls, GrayImage::Zero(h, w), "test"};
  m.mask.block(r0, c0, size, size).setConstant(1);
  return m;
}

}  // namespace

TEST_CASE("encode_semantic_map") {
  SUBCASE("no masks gives an all-zero map") {
    const auto m = encode_semantic_map({}, 8, 6);
    CHECK(m.width() == 8);
    CHECK(m.height() == 6);
    CHECK(m.pixels.cast<int>().sum() == 0);
  }
  SUBCASE("a car block is 85") {
    const std::vector<InstanceMask> masks{block(PriorClass::Car, 20, 20, 5, 5, 10)};
    const auto m = encode_semantic_map(masks, 20, 20);
    CHECK((m.pixels.block(5, 5, 10, 10).array() == 85).all());
    CHECK(m.pixels.cast<int>().sum() == 85 * 100);
  }
  SUBCASE("pedestrian wins over car where they overlap") {
    std::vector<InstanceMask> masks{block(PriorClass::Car, 20, 20, 0, 0, 10),
                                    block(PriorClass::Pedestrian, 20, 20, 5, 5, 10)};
    for (int order = 0; order < 2; ++order) {
      const auto m = encode_semantic_map(masks, 20, 20);
      CHECK(m.pixels(7, 7) == 170);
      CHECK(m.pixels(2, 2) == 85);
      CHECK(m.pixels(12, 12) == 170);
      std::reverse(masks.begin(), masks.end());
    }
  }
  SUBCASE("size mismatch") {
    const std::vector<InstanceMask> masks{block(PriorClass::Car, 20, 20, 0, 0, 3)};
    CHECK_THROWS_AS(encode_semantic_map(masks, 21, 20), DimensionMismatch);
  }
}

TEST_CASE("encoding is order-independent and closed over the table") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<InstanceMask> masks;
    const int n = static_cast<int>(rng.integer(1, 8));
    for (int i = 0; i < n; ++i) {
      InstanceMask m{static_cast<PriorClass>(rng.integer(0, 2)), GrayImage(16, 24), ""};
      for (Index k = 0; k < m.mask.size(); ++k) m.mask.data()[k] = rng.bernoulli(0.3) ? 255 : 0;
      masks.push_back(std::move(m));
    }
    const auto ref = encode_semantic_map(masks, 24, 16);
    std::mt19937 shuf(static_cast<unsigned>(trial));
    for (int p = 0; p < 5; ++p) {
      std::shuffle(masks.begin(), masks.end(), shuf);
      CHECK(encode_semantic_map(masks, 24, 16).pixels == ref.pixels);
    }
    for (Index k = 0; k < ref.pixels.size(); ++k) {
      const int v = ref.pixels.data()[k];
      CHECK((v == 0 || v == 85 || v == 170 || v == 255));
    }
  }
}

TEST_CASE("pgm io") {
  SUBCASE("2x2 map is 15 bytes and comes back identical") {
    GrayPriorMap m;
    m.pixels.resize(2, 2);
    m.pixels << 0, 85, 170, 255;
    std::ostringstream os;
    write_pgm(os, m);
    const std::string bytes = os.str();
    CHECK(bytes.size() == 15);
    CHECK(bytes.substr(0, 11) == "P5\n2 2\n255\n");
    std::istringstream is(bytes);
    CHECK(read_pgm(is).pixels == m.pixels);
  }
  SUBCASE("maxval 65535 is rejected") {
    std::istringstream is(std::string("P5\n2 2\n65535\n") + std::string(8, '\0'));
    CHECK_THROWS_AS(read_pgm(is), FormatError);
  }
  SUBCASE("bad magic") {
    std::istringstream is(std::string("P2\n2 2\n255\n0 0 0 0"));
    CHECK_THROWS_AS(read_pgm(is), FormatError);
  }
  SUBCASE("short payload") {
    std::istringstream is(std::string("P5\n2 2\n255\n") + std::string(3, '\0'));
    CHECK_THROWS_AS(read_pgm(is), TruncatedData);
  }
  SUBCASE("header comments are skipped") {
    std::istringstream is(std::string("P5\n# made by hand\n2 1\n255\n") + "\x55\xaa");
    const auto m = read_pgm(is);
    CHECK(m.pixels(0, 0) == 0x55);
    CHECK(m.pixels(0, 1) == 0xaa);
  }
  SUBCASE("random maps round trip bit-exactly") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      GrayPriorMap m;
      m.pixels.resize(rng.integer(1, 40), rng.integer(1, 40));
      for (Index k = 0; k < m.pixels.size(); ++k) m.pixels.data()[k] = static_cast<std::uint8_t>(rng.integer(0, 255));
      std::ostringstream os;
      write_pgm(os, m);
      std::istringstream is(os.str());
      CHECK(read_pgm(is).pixels == m.pixels);
    }
  }
}

TEST_CASE("map_to_tensor") {
  GrayPriorMap m;
  m.pixels = GrayImage::Zero(3, 4);
  const Tensor zero = map_to_tensor(m);
  CHECK(zero.shape() == Shape{1, 1, 3, 4});
  for (double v : zero.data()) CHECK(v == 0.0);
  m.pixels.resize(2, 2);
  m.pixels << 255, 85, 0, 170;
  const Tensor t = map_to_tensor(m);
  CHECK(t.shape() == Shape{1, 1, 2, 2});
  CHECK(t(0, 0, 0, 0) == 1.0);
  CHECK(std::abs(t(0, 0, 0, 1) - 0.333333) <= 1e-6);
}

TEST_CASE("intensity table parsing") {
  const auto t = parse_intensity_table("Car 10\npedestrian 20\n");
  CHECK(t[PriorClass::Car] == 10);
  CHECK(t[PriorClass::Pedestrian] == 20);
  CHECK(t[PriorClass::Cyclist] == 255);
  CHECK_THROWS(parse_intensity_table("Car 0\n"));
  CHECK_THROWS(parse_intensity_table("Car 255\n"));  // collides with Cyclist
  CHECK_THROWS(parse_intensity_table("Truck 5\n"));
}

TEST_CASE("mask manifests") {
  fixture::TempDir dir;
  GrayImage car = GrayImage::Zero(4, 6), ped = GrayImage::Zero(4, 6);
  car.block(0, 0, 2, 3).setConstant(255);
  ped.block(1, 2, 2, 2).setConstant(1);
  for (auto [name, img] : {std::pair<const char*, GrayImage*>{"car.pgm", &car}, {"ped.pgm", &ped}}) {
    std::ostringstream os;
    write_graymap(os, *img);
    fixture::write_text(dir / name, os.str());
  }
  const auto man = parse_mask_manifest("# frame 0\nCar car.pgm grounded_sam\nPedestrian ped.pgm\n");
  REQUIRE(man.entries.size() == 2);
  CHECK(man.entries[0].source == "grounded_sam");
  const auto map = encode_frame(man, dir.path);
  REQUIRE(map.has_value());
  CHECK(map->pixels(0, 0) == 85);
  CHECK(map->pixels(1, 2) == 170);
  CHECK(map->pixels(3, 5) == 0);

  CHECK_FALSE(encode_frame(parse_mask_manifest(""), dir.path).has_value());
  const auto blank = encode_frame(parse_mask_manifest("size 5 3\n"), dir.path);
  REQUIRE(blank.has_value());
  CHECK(blank->width() == 5);
  CHECK(blank->height() == 3);

  CHECK_THROWS(encode_frame(parse_mask_manifest("Car missing.pgm\n"), dir.path));
  CHECK_THROWS(parse_mask_manifest("Bus car.pgm\n"));
}
