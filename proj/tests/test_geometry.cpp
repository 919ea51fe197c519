#include <doctest.h>

#include <cmath>

#include "trapmodes/errors.hpp"
#include "trapmodes/geometry.hpp"

using namespace trapmodes;

TEST_CASE("obstacles leave N+1 gaps of the expected widths") {
  const WaveguideSpec spec(3, 1.0, GapProfile::parabolic(0.5), WallBc::Neumann);
  const double g0 = spec.g(0.0);
  CHECK(g0 == doctest::Approx(0.5));
  const auto gaps = gap_intervals(spec, 0.0);
  REQUIRE(gaps.size() == 4);
  CHECK(gaps[0].lo == 0.0);
  CHECK(gaps[0].hi == doctest::Approx(0.5));
  CHECK(gaps[1].lo == doctest::Approx(1.5));
  CHECK(gaps[1].hi == doctest::Approx(2.5));
  CHECK(gaps[3].hi == 6.0);
  double total = 0.0;
  for (const auto& iv : gaps) total += iv.length();
  CHECK(total == doctest::Approx(6.0 - 3 * 2 * g0));
}

TEST_CASE("outside the obstacle band the strip is a single interval") {
  const WaveguideSpec spec(2, 1.0, GapProfile::cosine(0.3), WallBc::Neumann);
  const auto gaps = gap_intervals(spec, 1.5);
  REQUIRE(gaps.size() == 1);
  CHECK(gaps[0].lo == 0.0);
  CHECK(gaps[0].hi == 4.0);
  CHECK(spec.g(1.5) == 0.0);
}

TEST_CASE("midline segments split the strip into unit-height pairs") {
  const WaveguideSpec spec(3, 0.5, GapProfile::zero(), WallBc::Neumann, Variant::MidlineSegments);
  const auto gaps = gap_intervals(spec, 0.2);
  REQUIRE(gaps.size() == 3);
  for (int s = 0; s < 3; ++s) {
    CHECK(gaps[s].lo == 2.0 * s);
    CHECK(gaps[s].hi == 2.0 * s + 2.0);
  }
  CHECK_FALSE(in_domain(spec, 0.2, 2.0));
  CHECK(in_domain(spec, 0.7, 2.0));
}

TEST_CASE("points on a slit or inside an obstacle are excluded") {
  const WaveguideSpec thin(2, 1.0, GapProfile::zero(), WallBc::Neumann);
  CHECK_FALSE(in_domain(thin, 0.0, 1.0));
  CHECK(in_domain(thin, 0.0, 1.0 + 1e-9));
  const WaveguideSpec thick(2, 1.0, GapProfile::parabolic(0.4), WallBc::Neumann);
  CHECK_FALSE(in_domain(thick, 0.0, 3.2));
  CHECK(in_domain(thick, 0.0, 3.5));
  CHECK_FALSE(in_domain(thick, 0.0, 0.0));
  CHECK_FALSE(in_domain(thick, 0.0, 4.0));
}

TEST_CASE("profiles evaluate to their formulas") {
  const double a = 2.0;
  CHECK(GapProfile::parabolic(0.5)(1.0, a) == doctest::Approx(0.5 * 0.75));
  CHECK(GapProfile::cosine(0.3)(1.0, a) == doctest::Approx(0.3 * 0.5));
  const auto s = GapProfile::samples({0.0, 0.4, 0.0});
  CHECK(s(0.0, a) == doctest::Approx(0.4));
  CHECK(s(1.0, a) == doctest::Approx(0.2));
  CHECK(s.breakpoints(a).size() == 1);
  CHECK(GapProfile::zero().is_zero());
  CHECK(GapProfile::parabolic(0.0).is_zero());
  CHECK(GapProfile::parabolic(0.5).label() == "parabolic:0.5");
}

TEST_CASE("invalid settings are rejected") {
  CHECK_THROWS_AS(WaveguideSpec(0, 1.0, GapProfile::zero(), WallBc::Neumann), SpecError);
  CHECK_THROWS_AS(WaveguideSpec(2, -1.0, GapProfile::zero(), WallBc::Neumann), SpecError);
  CHECK_THROWS_AS(WaveguideSpec(2, 1.0, GapProfile::parabolic(1.2), WallBc::Neumann), SpecError);
  CHECK_THROWS_AS(WaveguideSpec(2, 1.0, GapProfile::parabolic(1.0), WallBc::Neumann), SpecError);
  CHECK_THROWS_AS(WaveguideSpec(2, 1.0, GapProfile::samples({0.1, 0.2, 0.0}), WallBc::Neumann), SpecError);
  CHECK_THROWS_AS(WaveguideSpec(1, 1.0, GapProfile::zero(), WallBc::Neumann, Variant::MidlineSegments),
                  SpecError);
  CHECK_THROWS_AS(WaveguideSpec(2, 1.0, GapProfile::zero(), WallBc::Dirichlet, Variant::MidlineSegments),
                  SpecError);
}
