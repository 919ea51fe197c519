#include <doctest.h>

#include <cmath>
#include <numbers>

#include "trapmodes/errors.hpp"
#include "trapmodes/symmetry.hpp"
#include "trapmodes/testfun.hpp"

using namespace trapmodes;

namespace {

constexpr double kPi = std::numbers::pi;

// Projection of the indicator of one gap, evaluated from the 4N-periodic
// extension at a point y inside gap s.
double indicator_projection(const WaveguideSpec& spec, int m, int source, double sign, double y) {
  const int n = spec.n();
  const bool dir = spec.wall_bc() == WallBc::Dirichlet;
  const bool seg = spec.variant() == Variant::MidlineSegments;
  auto in_source = [&](double t) {
    const double lo = seg ? 2.0 * source : 2.0 * source - 1.0;
    const double hi = lo + 2.0;
    return t > lo && t < hi ? sign : 0.0;
  };
  auto ext = [&](double t) {
    const double period = 4.0 * n;
    double r = std::fmod(t, period);
    if (r < 0) r += period;
    if (r <= 2.0 * n) return in_source(r);
    return (dir ? -1.0 : 1.0) * in_source(period - r);
  };
  const double g = (m == 0 || m == n) ? 1.0 : 2.0;
  double s = 0.0;
  for (int k = -n; k < n; ++k) s += std::cos(m * k * kPi / n) * ext(y + 2.0 * k);
  return g / (2.0 * n) * s;
}

double probe(const WaveguideSpec& spec, int s) {
  if (spec.variant() == Variant::MidlineSegments) return 2.0 * s + 0.7;
  return s == spec.n() ? 2.0 * s - 0.3 : 2.0 * s + 0.3;
}

}  // namespace

TEST_CASE("cutoffs and tails") {
  CHECK(chi(0.1, 1.0, 0.5) == 1.0);
  CHECK(chi(0.75, 1.0, 0.5) == doctest::Approx(0.5));
  CHECK(chi(1.2, 1.0, 0.5) == 0.0);
  CHECK(chi_prime(-0.75, 1.0, 0.5) == doctest::Approx(2.0));
  CHECK(chi_prime(0.75, 1.0, 0.5) == doctest::Approx(-2.0));
  CHECK(psi(0.3, 0.5, 1.0) == 1.0);
  CHECK(psi(3.0, 0.5, 1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(psi_prime(-3.0, 0.5, 1.0) == doctest::Approx(0.5 * std::exp(-1.0)));
  CHECK_THROWS_AS(validate(TestParams{0.0, 1.0, 0.0}, 1.0), SpecError);
  CHECK_THROWS_AS(validate(TestParams{1.0, 1.0, 1.0}, 1.0), SpecError);
}

TEST_CASE("admissible classes per setting") {
  CHECK(admissible_classes(WaveguideSpec(3, 1.0, GapProfile::zero(), WallBc::Neumann)).size() == 3);
  CHECK(admissible_classes(WaveguideSpec(3, 1.0, GapProfile::zero(), WallBc::Dirichlet)).size() == 2);
  CHECK(admissible_classes(WaveguideSpec(1, 1.0, GapProfile::zero(), WallBc::Dirichlet)).empty());
  CHECK(admissible_classes(WaveguideSpec(2, 1.0, GapProfile::zero(), WallBc::Neumann, Variant::MidlineSegments))
            .size() == 1);
  CHECK_THROWS_AS(transverse_profile(WaveguideSpec(2, 1.0, GapProfile::zero(), WallBc::Dirichlet), 2),
                  InadmissibleClass);
  CHECK_THROWS_AS(transverse_profile(WaveguideSpec(2, 1.0, GapProfile::zero(), WallBc::Neumann), 0),
                  InadmissibleClass);
}

TEST_CASE("profiles match the projected indicator evaluated from the extension") {
  std::vector<WaveguideSpec> specs;
  for (int n = 1; n <= 5; ++n) {
    specs.emplace_back(n, 1.0, GapProfile::zero(), WallBc::Neumann);
    specs.emplace_back(n, 1.0, GapProfile::zero(), WallBc::Dirichlet);
    if (n >= 2) specs.emplace_back(n, 1.0, GapProfile::zero(), WallBc::Neumann, Variant::MidlineSegments);
  }
  for (const auto& spec : specs)
    for (int m : admissible_classes(spec)) {
      const auto prof = transverse_profile(spec, m);
      for (std::size_t s = 0; s < prof.values.size(); ++s) {
        const double want = indicator_projection(spec, m, prof.source_index, prof.orientation,
                                                 probe(spec, static_cast<int>(s)));
        CHECK(prof.values[s] == doctest::Approx(want).epsilon(1e-12));
      }
    }
}

TEST_CASE("obstacle profile for N = 2, m = 1 and its norm") {
  const WaveguideSpec spec(2, 1.0, GapProfile::zero(), WallBc::Neumann);
  const auto prof = transverse_profile(spec, 1);
  CHECK(prof.values[0] == doctest::Approx(0.5));
  CHECK(std::fabs(prof.values[1]) < 1e-15);
  CHECK(prof.values[2] == doctest::Approx(-0.5));
  CHECK(v_norm_sq(prof) == doctest::Approx(0.5));
}

TEST_CASE("Dirichlet source sign keeps the transverse overlap positive") {
  const WaveguideSpec spec(4, 1.0, GapProfile::zero(), WallBc::Dirichlet);
  const auto prof = transverse_profile(spec, 3);
  CHECK(prof.source_index == 2);
  CHECK(prof.orientation == -1.0);
  const double p = 3 * kPi / 8.0;
  double overlap = 0.0;
  const auto gaps = gap_intervals(spec, 0.0);
  for (std::size_t s = 0; s < gaps.size(); ++s)
    overlap += prof.values[s] * (std::cos(p * gaps[s].lo) - std::cos(p * gaps[s].hi)) / p;
  CHECK(overlap > 0.0);
}

TEST_CASE("phi and its gradient") {
  const WaveguideSpec spec(2, 1.0, GapProfile::parabolic(0.3), WallBc::Neumann);
  const TestParams params{1.7, 0.4, 0.3};
  const TestFunction tf(spec, 1, params);
  const double p = kPi / 4.0;
  CHECK(phi(spec, 1, params, 2.5, 1.0) == doctest::Approx(1.7 * std::exp(-0.4 * 1.5) * std::cos(p)));
  CHECK_THROWS_AS(phi(spec, 1, params, 0.0, 1.0), OutOfDomain);
  CHECK_THROWS_AS(phi(spec, 1, params, 0.0, -0.1), OutOfDomain);
  for (double x : {-0.8, -0.1, 0.5, 1.4})
    for (double y : {0.2, 2.1, 3.9}) {
      if (!in_domain(spec, x, y)) continue;
      const double h = 1e-6;
      const auto gr = tf.gradient(x, y);
      CHECK(gr[0] == doctest::Approx((tf(x + h, y) - tf(x - h, y)) / (2 * h)).epsilon(1e-6));
      CHECK(gr[1] == doctest::Approx((tf(x, y + h) - tf(x, y - h)) / (2 * h)).epsilon(1e-6));
    }
}
