#include <catch2/catch_amalgamated.hpp>

#include "hullopt/morph.hpp"
#include "hullopt/oracle.hpp"
#include "hullopt/rng.hpp"

using namespace hullopt;

namespace {
const BaselineRatios kBaseline{6.96, 3.52};

DesignParams baseline_params(double scale_x = 1.0) {
  DesignParams p;
  p.scale_x = scale_x;
  p.LbyB = kBaseline.LbyB0;
  p.BbyT = kBaseline.BbyT0;
  p.midship = 0.5;
  p.v_inf = 1.0;
  return p;
}
}  // namespace

TEST_CASE("derived scales: identity, uniform, and ratio cases") {
  auto s = derived_scales(baseline_params(), kBaseline);
  REQUIRE(s.x == 1.0);
  REQUIRE(s.y == 1.0);
  REQUIRE(s.z == 1.0);

  s = derived_scales(baseline_params(2.0), kBaseline);
  REQUIRE(s.x == 2.0);
  REQUIRE(s.y == 2.0);
  REQUIRE(s.z == 2.0);

  DesignParams p = baseline_params();
  p.LbyB = 6.0;
  s = derived_scales(p, kBaseline);
  REQUIRE(s.y == Catch::Approx(1.16).epsilon(1e-12));
}

TEST_CASE("shift curve: clamped ends, exact peak, half-way value") {
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const double m = rng.uniform(0.01, 0.99);
    const double a = rng.uniform(-1.0, 1.0);
    REQUIRE(shift_curve(0.0, m, a) == 0.0);
    REQUIRE(shift_curve(1.0, m, a) == 0.0);
    REQUIRE(shift_curve(m, m, a) == Catch::Approx(a).margin(1e-15));
  }
  REQUIRE(shift_curve(0.25, 0.5, 1.0) == Catch::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("shift curve is C1: slopes vanish at ends and join") {
  const double m = 0.37, a = 0.8, h = 1e-7;
  auto slope = [&](double t) { return (shift_curve(t + h, m, a) - shift_curve(t - h, m, a)) / (2 * h); };
  REQUIRE(std::abs(slope(h)) < 1e-5);
  REQUIRE(std::abs(slope(1 - h)) < 1e-5);
  REQUIRE(std::abs(slope(m)) < 1e-5);
}

TEST_CASE("apply_morph: identity is bit-exact") {
  const OracleConfig cfg;
  const HullMesh hull = make_baseline_hull(cfg);
  const HullMesh morphed = apply_morph(hull, baseline_params(), cfg.baseline_ratios(), 0.0);
  REQUIRE(morphed.faces() == hull.faces());
  for (std::size_t i = 0; i < hull.vertex_count(); ++i) {
    REQUIRE(morphed.vertices()[i].x == hull.vertices()[i].x);
    REQUIRE(morphed.vertices()[i].y == hull.vertices()[i].y);
    REQUIRE(morphed.vertices()[i].z == hull.vertices()[i].z);
  }
}

TEST_CASE("apply_morph: pure scaling follows the volume product law") {
  const OracleConfig cfg;
  const HullMesh hull = make_baseline_hull(cfg);
  DesignParams p = baseline_params(2.0);
  p.LbyB = kBaseline.LbyB0 * 2.0 / 3.0;  // scale_y = 3
  p.BbyT = kBaseline.BbyT0 * 3.0 / 4.0;  // scale_z = 4
  const auto s = derived_scales(p, cfg.baseline_ratios());
  REQUIRE(s.y == Catch::Approx(3.0).epsilon(1e-12));
  REQUIRE(s.z == Catch::Approx(4.0).epsilon(1e-12));
  const HullMesh morphed = apply_morph(hull, p, cfg.baseline_ratios(), 0.0);
  REQUIRE(enclosed_volume(morphed) ==
          Catch::Approx(24.0 * enclosed_volume(hull)).epsilon(1e-9));
}

TEST_CASE("apply_morph: shift matches the per-vertex formula and keeps topology") {
  const OracleConfig cfg;
  const HullMesh hull = make_baseline_hull(cfg);
  const double amplitude = 0.02 * cfg.L0;
  DesignParams p = baseline_params();
  p.midship = 0.5;
  const HullMesh morphed = apply_morph(hull, p, cfg.baseline_ratios(), amplitude);
  REQUIRE(morphed.faces() == hull.faces());
  const double x0 = hull.min_corner().x;
  const double extent = hull.max_corner().x - hull.min_corner().x;
  for (std::size_t i = 0; i < hull.vertex_count(); ++i) {
    const double t = (hull.vertices()[i].x - x0) / extent;
    const double expect = hull.vertices()[i].x + shift_curve(t, p.midship, amplitude);
    REQUIRE(morphed.vertices()[i].x == Catch::Approx(expect).margin(1e-15));
    if (std::abs(t - 0.5) < 1e-12) {
      REQUIRE(morphed.vertices()[i].x - hull.vertices()[i].x == Catch::Approx(amplitude));
    }
  }
}

TEST_CASE("apply_morph: shift changes volume within the slope bound") {
  const OracleConfig cfg;
  const HullMesh hull = make_baseline_hull(cfg);
  const double v0 = enclosed_volume(hull);
  Rng rng(21);
  for (int i = 0; i < 10; ++i) {
    DesignParams p = baseline_params();
    p.midship = rng.uniform(0.2, 0.8);
    const double amplitude = rng.uniform(0.0, 0.02) * cfg.L0;
    const HullMesh morphed = apply_morph(hull, p, cfg.baseline_ratios(), amplitude);
    const double dv = std::abs(enclosed_volume(morphed) - v0) / v0;
    const double extent = hull.max_corner().x - hull.min_corner().x;
    const double bound = shift_curve_max_slope(p.midship, amplitude) / extent;
    REQUIRE(dv <= bound + 1e-12);
  }
  // at the default amplitude cap and centered midship the change is below 1%
  DesignParams p = baseline_params();
  const HullMesh morphed = apply_morph(hull, p, cfg.baseline_ratios(), 0.02 * cfg.L0);
  REQUIRE(std::abs(enclosed_volume(morphed) - v0) / v0 < 0.01);
}

TEST_CASE("apply_morph: non-monotone x mapping is rejected") {
  const OracleConfig cfg;
  const HullMesh hull = make_baseline_hull(cfg);
  DesignParams p = baseline_params();
  p.midship = 0.2;
  // slope 1.5 * a / (0.2 * L) >= 1 requires a >= 0.1333 L
  REQUIRE_THROWS_AS(apply_morph(hull, p, cfg.baseline_ratios(), 0.14 * cfg.L0), MorphRejected);
}

TEST_CASE("make_params validates bounds") {
  const DesignBounds bounds;
  REQUIRE_NOTHROW(make_params(bounds, {1.0, 6.96, 3.52, 0.5, 1.0}));
  REQUIRE_THROWS_AS(make_params(bounds, {1.5, 6.96, 3.52, 0.5, 1.0}), DataError);
  DesignBounds bad;
  bad.lower[0] = bad.upper[0];
  REQUIRE_THROWS_AS(bad.validate(), DataError);
}
