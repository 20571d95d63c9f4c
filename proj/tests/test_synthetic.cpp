#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "topodesc/filtration.hpp"
#include "topodesc/persistence.hpp"
#include "topodesc/synthetic.hpp"

using namespace topodesc;

namespace {

SyntheticSpec small_spec(std::uint64_t seed) {
  SyntheticSpec s;
  s.width = 96;
  s.height = 80;
  s.groove_width = 8;
  s.seed = seed;
  s.engraved_shapes = {{{10, 10}, {80, 60}}, {{20, 70}}};
  return s;
}

double h0_total_persistence(const Patch& p) {
  const auto d = finitize(compute_persistence(build_filtration(p)), EssentialPolicy::drop_essential);
  double total = 0.0;
  for (const auto& pt : d.points)
    if (pt.dim == 0) total += pt.persistence();
  return total;
}

}  // namespace

TEST_CASE("no shapes gives an empty mask") {
  auto s = small_spec(1);
  s.engraved_shapes.clear();
  const auto [depth, mask] = generate(s);
  CHECK(depth.width == 96);
  CHECK(depth.height == 80);
  CHECK(mask.positive_fraction() == 0.0);
}

TEST_CASE("SyntheticSpec validation") {
  auto s = small_spec(1);
  s.groove_depth = 0;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
  s = small_spec(1);
  s.engraved_shapes = {{{10, 10}, {200, 10}}};
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
  s = small_spec(1);
  s.base_min_wavelength = 100;
  s.base_max_wavelength = 10;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
  s = small_spec(1);
  s.noise_amplitude = -1;
  CHECK_THROWS_AS(generate(s), std::invalid_argument);
}

TEST_CASE("fixed seed is bit-identical") {
  const auto a = generate(small_spec(5));
  const auto b = generate(small_spec(5));
  CHECK(a.first.values == b.first.values);
  CHECK(a.second.labels == b.second.labels);
  CHECK(generate(small_spec(6)).first.values != a.first.values);
  for (double v : a.first.values) REQUIRE(std::isfinite(v));
}

TEST_CASE("mask marks exactly the depressed support") {
  auto with = small_spec(3);
  with.noise_amplitude = 0;
  with.peck_density = 0;
  auto without = with;
  without.engraved_shapes.clear();
  const auto [dw, mw] = generate(with);
  const auto [dn, mn] = generate(without);
  CHECK(mw.labels == stroke_support(96, 80, with.engraved_shapes, with.groove_width).labels);
  std::size_t depressed = 0;
  for (std::size_t i = 0; i < dw.values.size(); ++i) {
    const double drop = dn.values[i] - dw.values[i];
    if (mw.labels[i]) {
      REQUIRE(drop > 0.0);
      REQUIRE(drop <= with.groove_depth + 1e-12);
      ++depressed;
    } else {
      REQUIRE(drop == 0.0);
    }
  }
  CHECK(depressed > 0);
}

TEST_CASE("pits stay inside the support") {
  auto with = small_spec(4);
  with.noise_amplitude = 0;
  with.peck_density = 0.05;
  auto smooth = with;
  smooth.peck_density = 0;
  const auto [dp, mp] = generate(with);
  const auto [ds, ms] = generate(smooth);
  bool any = false;
  for (std::size_t i = 0; i < dp.values.size(); ++i) {
    if (!mp.labels[i]) REQUIRE(dp.values[i] == ds.values[i]);
    any |= dp.values[i] < ds.values[i];
  }
  CHECK(any);
}

TEST_CASE("planned strokes hit the requested class fraction") {
  for (std::uint64_t seed = 0; seed < 8; ++seed)
    for (double target : {0.166, 0.3}) {
      const auto strokes = plan_strokes(256, 256, 12, target, 0.01, seed);
      const double frac = stroke_support(256, 256, strokes, 12).positive_fraction();
      REQUIRE(std::abs(frac - target) <= 0.02);
    }
  CHECK(plan_strokes(64, 64, 4, 0.0, 0.01, 1).empty());
  CHECK_THROWS(plan_strokes(64, 64, 4, 1.0, 0.01, 1));
}

TEST_CASE("benchmark maps mirror the class imbalance") {
  const auto specs = benchmark_specs(4, 512, 512, 0.166, 11);
  REQUIRE(specs.size() == 4);
  for (std::size_t k = 0; k < specs.size(); ++k) {
    CHECK(specs[k].seed == 11 + k);
    const auto [depth, mask] = generate(specs[k]);
    CHECK(std::abs(mask.positive_fraction() - 0.166) <= 0.02);
  }
}

TEST_CASE("engraved patches carry more H0 persistence") {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto spec = benchmark_specs(1, 384, 384, 0.166, 500 + seed)[0];
    const auto [depth, mask] = generate(spec);
    const auto patches = extract_patches(depth, &mask, 32, 8);
    double sum[2] = {0, 0};
    std::size_t n[2] = {0, 0};
    for (const auto& p : patches) {
      const int c = *p.label;
      if (n[c] >= 100) continue;
      sum[c] += h0_total_persistence(p);
      ++n[c];
    }
    REQUIRE(n[0] == 100);
    REQUIRE(n[1] == 100);
    wins += sum[1] / n[1] > sum[0] / n[0];
  }
  CHECK(wins >= 9);
}
