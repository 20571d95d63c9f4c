#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <random>

#include "test_util.hpp"
#include "topodesc/grid.hpp"
#include "topodesc/image_io.hpp"

using namespace topodesc;

TEST_CASE("text matrix parses verbatim") {
  const auto map = parse_text_matrix("0 1\n2 3\n");
  CHECK(map.width == 2);
  CHECK(map.height == 2);
  CHECK(map.values == std::vector<double>{0, 1, 2, 3});
}

TEST_CASE("text matrix errors") {
  CHECK_THROWS_WITH_AS(parse_text_matrix("0 1\n2\n"), doctest::Contains("ragged"), std::runtime_error);
  CHECK_THROWS_AS(parse_text_matrix("0 x\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_text_matrix("nan 1\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_text_matrix(""), std::runtime_error);
  CHECK_THROWS_AS(load_depth_map("/nonexistent/file.txt"), std::runtime_error);
}

TEST_CASE("png16 scaling") {
  const auto dir = testing::temp_dir("grid");
  io::GrayImage img{3, 1, 16, {65535, 32768, 0}};
  io::write_gray_png(img, dir / "d.png");
  const auto map = load_depth_map(dir / "d.png", DepthFormat::png16);
  CHECK(map.at(0, 0) == 1.0);
  CHECK(map.at(0, 1) == doctest::Approx(32768.0 / 65535.0).epsilon(1e-15));
  CHECK(map.at(0, 1) == doctest::Approx(0.50001).epsilon(1e-5));
  CHECK(map.at(0, 2) == 0.0);
}

TEST_CASE("colour PNG is rejected") {
  const auto dir = testing::temp_dir("grid");
  io::RgbImage rgb(2, 2, 10);
  io::write_rgb_png(rgb, dir / "rgb.png");
  CHECK_THROWS_WITH_AS(load_depth_map(dir / "rgb.png"), doctest::Contains("grayscale"), std::runtime_error);
}

TEST_CASE("text and png16 writers round-trip") {
  const auto dir = testing::temp_dir("grid");
  DepthMap map(3, 2);
  map.values = {0.0, 0.25, 0.5, 0.75, 1.0, 0.125};
  save_depth_map_text(map, dir / "m.txt");
  CHECK(load_depth_map(dir / "m.txt").values == map.values);
  save_depth_map_png16(map, dir / "m.png");
  const auto back = load_depth_map(dir / "m.png");
  for (std::size_t i = 0; i < map.values.size(); ++i) CHECK(back.values[i] == doctest::Approx(map.values[i]).epsilon(1e-4));
}

TEST_CASE("mask PNG: nonzero is class 1") {
  const auto dir = testing::temp_dir("grid");
  io::GrayImage img{2, 2, 8, {0, 1, 255, 0}};
  io::write_gray_png(img, dir / "mask.png");
  const auto mask = load_label_mask(dir / "mask.png");
  CHECK(mask.labels == std::vector<std::uint8_t>{0, 1, 1, 0});
}

TEST_CASE("patch counts") {
  CHECK(extract_patches(DepthMap(128, 128), nullptr, 128, 16).size() == 1);
  CHECK(extract_patches(DepthMap(160, 160), nullptr, 128, 16).size() == 9);
  CHECK_THROWS_AS(extract_patches(DepthMap(100, 200), nullptr, 128, 16), std::invalid_argument);
  LabelMask wrong(10, 10);
  CHECK_THROWS_AS(extract_patches(DepthMap(20, 20), &wrong, 8, 4), std::invalid_argument);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t size = 1 + rng() % 8, step = 1 + rng() % 5;
    const std::size_t h = size + rng() % 20, w = size + rng() % 20;
    const auto patches = extract_patches(DepthMap(w, h), nullptr, size, step);
    CHECK(patches.size() == ((h - size) / step + 1) * ((w - size) / step + 1));
  }
}

TEST_CASE("patch windows are exact copies") {
  std::mt19937_64 rng(9);
  DepthMap map(37, 29);
  for (auto& v : map.values) v = std::uniform_real_distribution<double>(-3, 3)(rng);
  for (const auto& p : extract_patches(map, nullptr, 7, 3, 0.5, "src")) {
    CHECK(p.source_id == "src");
    REQUIRE(p.row + p.size <= map.height);
    REQUIRE(p.col + p.size <= map.width);
    for (std::size_t r = 0; r < p.size; ++r)
      for (std::size_t c = 0; c < p.size; ++c) REQUIRE(p.at(r, c) == map.at(p.row + r, p.col + c));
  }
}

TEST_CASE("labels follow the class-1 fraction threshold") {
  DepthMap map(8, 8);
  LabelMask zero(8, 8);
  for (const auto& p : extract_patches(map, &zero, 4, 2, 0.5)) CHECK(p.label == 0);

  std::mt19937_64 rng(3);
  LabelMask mask(16, 16);
  for (auto& l : mask.labels) l = rng() % 3 == 0;
  const auto lo = extract_patches(DepthMap(16, 16), &mask, 6, 2, 0.2);
  const auto hi = extract_patches(DepthMap(16, 16), &mask, 6, 2, 0.45);
  for (std::size_t i = 0; i < lo.size(); ++i) {
    CHECK(*hi[i].label <= *lo[i].label);  // monotone in the threshold
    std::size_t count = 0;
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t c = 0; c < 6; ++c) count += mask.at(lo[i].row + r, lo[i].col + c);
    CHECK(*lo[i].label == (count / 36.0 >= 0.2 ? 1 : 0));
  }
  CHECK_THROWS_AS(extract_patches(DepthMap(8, 8), &zero, 4, 2, 0.0), std::invalid_argument);
}

TEST_CASE("normalize_patch") {
  const auto p = testing::make_patch(2, {0, 2, 4, 8});
  const auto mm = normalize_patch(p, Normalization::per_patch());
  CHECK(mm.patch.values == std::vector<double>{0, 0.25, 0.5, 1});
  CHECK_FALSE(mm.degenerate);

  CHECK(normalize_patch(p, Normalization::identity()).patch.values == p.values);

  const auto c = normalize_patch(testing::make_patch(2, {3, 3, 3, 3}), Normalization::per_patch());
  CHECK(c.patch.values == std::vector<double>{0, 0, 0, 0});
  CHECK(c.degenerate);

  const auto g = normalize_patch(p, Normalization::global_bounds(0, 16));
  CHECK(g.patch.values == std::vector<double>{0, 0.125, 0.25, 0.5});
}

TEST_CASE("minmax output spans [0,1] on non-constant patches") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    auto values = testing::random_pixels(16, 50, rng);
    values[0] = 0;
    values[1] = 49;
    const auto out = normalize_patch(testing::make_patch(4, values), Normalization::per_patch()).patch.values;
    CHECK(*std::min_element(out.begin(), out.end()) == 0.0);
    CHECK(*std::max_element(out.begin(), out.end()) == 1.0);
  }
}
