#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "trapmodes/errors.hpp"
#include "trapmodes/quadrature.hpp"
#include "trapmodes/symmetry.hpp"
#include "trapmodes/variational.hpp"

using namespace trapmodes;

namespace {

constexpr double kPi = std::numbers::pi;

struct Gap {
  double lo, hi;
  int s;
};

std::vector<Gap> oracle_gaps(const WaveguideSpec& spec, double x) {
  const int n = spec.n();
  std::vector<Gap> out;
  if (std::fabs(x) > spec.a()) return {{0.0, 2.0 * n, -1}};
  if (spec.variant() == Variant::MidlineSegments) {
    for (int s = 0; s < n; ++s) out.push_back({2.0 * s, 2.0 * s + 2.0, s});
    return out;
  }
  const double g = spec.g(x);
  out.push_back({0.0, 1.0 - g, 0});
  for (int s = 1; s < n; ++s) out.push_back({2.0 * s - 1.0 + g, 2.0 * s + 1.0 - g, s});
  out.push_back({2.0 * n - 1.0 + g, 2.0 * n, n});
  return out;
}

// Tensor Gauss-Legendre evaluation of the quotient over |x| <= a plus exact
// exponential tails, with the trial function written out from scratch.
double oracle_quotient(const WaveguideSpec& spec, int m, const std::vector<double>& v,
                       const TestParams& t) {
  const int n = spec.n();
  const double a = spec.a();
  const double p = m * kPi / (2.0 * n);
  const bool dir = spec.wall_bc() == WallBc::Dirichlet;
  auto trig = [&](double y) { return dir ? std::sin(p * y) : std::cos(p * y); };
  auto dtrig = [&](double y) { return dir ? p * std::cos(p * y) : -p * std::sin(p * y); };
  auto cut = [&](double x) {
    const double ax = std::fabs(x);
    return ax <= t.b ? 1.0 : (a - ax) / (a - t.b);
  };
  auto dcut = [&](double x) {
    const double ax = std::fabs(x);
    return ax <= t.b ? 0.0 : (x > 0 ? -1.0 : 1.0) / (a - t.b);
  };
  const auto rule = quad::gauss_legendre(20);
  double mass = 0.0, energy = 0.0;
  const std::vector<double> cuts{-a, -t.b, t.b, a};
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k], hi = cuts[k + 1];
    if (hi <= lo) continue;
    const int panels = 48;
    const double w = (hi - lo) / panels;
    for (int q = 0; q < panels; ++q)
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = lo + w * (q + 0.5 + 0.5 * rule.nodes[i]);
        const double wx = 0.5 * w * rule.weights[i];
        for (const auto& gap : oracle_gaps(spec, x)) {
          const double vs = v[gap.s];
          const double hy = 0.5 * (gap.hi - gap.lo);
          for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            const double y = gap.lo + hy * (1.0 + rule.nodes[j]);
            const double wy = hy * rule.weights[j];
            const double f = cut(x) * vs + t.lambda * trig(y);
            const double fx = dcut(x) * vs;
            const double fy = t.lambda * dtrig(y);
            mass += wx * wy * f * f;
            energy += wx * wy * (fx * fx + fy * fy);
          }
        }
      }
  }
  const double l2 = t.lambda * t.lambda;
  mass += l2 * n / t.alpha;
  energy += l2 * (t.alpha * n + p * p * n / t.alpha);
  return energy / mass;
}

std::vector<double> neumann_profile(int n, int m) {
  std::vector<double> v;
  const double g = trapmodes::gamma(m, n);
  for (int s = 0; s <= n; ++s) v.push_back(g / (2.0 * n) * std::cos(m * s * kPi / n));
  return v;
}

}  // namespace

TEST_CASE("hand-check anchor through the originally printed closed form") {
  const WaveguideSpec spec(1, 1.0, GapProfile::zero(), WallBc::Neumann);
  const TestParams t{10.0, 0.05, 0.5};
  const auto printed = quotient_as_printed(spec, 1, t);
  CHECK(std::fabs(printed.numerator_excess + 88.8927) <= 1e-3);
  CHECK(std::fabs(printed.denominator - 2238.86) <= 1e-2);
  CHECK(std::fabs(printed.quotient - 2.42775) <= 1e-4);
  const auto quadrature = quotient_quadrature(spec, 1, t);
  const auto corrected = quotient_closed_form(spec, 1, t);
  const double want = oracle_quotient(spec, 1, neumann_profile(1, 1), t);
  CHECK(quadrature.quotient == doctest::Approx(want).epsilon(1e-11));
  CHECK(corrected.quotient == doctest::Approx(want).epsilon(1e-11));
  CHECK(std::fabs(printed.quotient - want) > 1e-2);
}

TEST_CASE("closed form and quadrature agree with the tensor oracle") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 1 + trial % 4;
    const double a = 0.5 + 1.5 * u(rng);
    GapProfile prof = trial % 3 == 0   ? GapProfile::zero()
                      : trial % 3 == 1 ? GapProfile::parabolic(0.6 * u(rng))
                                       : GapProfile::cosine(0.6 * u(rng));
    const WaveguideSpec spec(n, a, prof, WallBc::Neumann);
    const int m = 1 + static_cast<int>(u(rng) * n) % n;
    const TestParams t{std::exp(4.0 * u(rng) - 1.0), std::exp(3.0 * u(rng) - 4.0), a * 0.9 * u(rng)};
    const double want = oracle_quotient(spec, m, neumann_profile(n, m), t);
    CHECK(quotient_closed_form(spec, m, t).quotient == doctest::Approx(want).epsilon(1e-9));
    CHECK(quotient_quadrature(spec, m, t).quotient == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("quadrature in the Dirichlet and segment settings") {
  const TestParams t{2.0, 0.3, 0.25};
  for (const auto& spec : {WaveguideSpec(3, 1.0, GapProfile::parabolic(0.4), WallBc::Dirichlet),
                           WaveguideSpec(3, 0.7, GapProfile::zero(), WallBc::Neumann,
                                         Variant::MidlineSegments)})
    for (int m : admissible_classes(spec)) {
      const auto prof = transverse_profile(spec, m);
      const double want = oracle_quotient(spec, m, prof.values, t);
      CHECK(quotient_quadrature(spec, m, t).quotient == doctest::Approx(want).epsilon(1e-9));
    }
  CHECK_THROWS_AS(quotient_closed_form(WaveguideSpec(2, 1.0, GapProfile::zero(), WallBc::Dirichlet), 1, t),
                  UnsupportedSetting);
}

TEST_CASE("pure plateau limit for Dirichlet N = 2") {
  const WaveguideSpec spec(2, 1.0, GapProfile::zero(), WallBc::Dirichlet);
  const auto prof = transverse_profile(spec, 1);
  CHECK(prof.values[1] == doctest::Approx(1.0));
  const double b = 0.5;
  const auto forms = interior_forms(spec, prof, b, 1e-12);
  const auto q = assemble_quotient(forms, 2, kPi / 4.0, 0.0, 1.0);
  CHECK(q.quotient == doctest::Approx((2.0 / (1.0 - b)) / (2.0 * b + 2.0 * (1.0 - b) / 3.0)).epsilon(1e-11));
}

TEST_CASE("simple bounds on the quotient pieces") {
  const WaveguideSpec spec(2, 1.0, GapProfile::zero(), WallBc::Neumann);
  CHECK(quotient_quadrature(spec, 1, {1.0, 1.0, 0.3}).denominator > 2.0);
  const double near = quotient_closed_form(spec, 1, {1.0, 1.0, 0.999999}).numerator_excess;
  CHECK(near > 1e4);
}

TEST_CASE("optimizer") {
  const WaveguideSpec spec(1, 1.0, GapProfile::zero(), WallBc::Neumann);
  const auto res = optimize_params(spec, 1);
  CHECK(res.breakdown.quotient < kPi * kPi / 4.0);
  CHECK(res.breakdown.quotient <= res.grid_quotient);
  const auto one = optimize_params(spec, 1, 1);
  CHECK(one.params.lambda == res.grid_params.lambda);
  CHECK(one.params.alpha == res.grid_params.alpha);
  CHECK(one.params.b == res.grid_params.b);
  CHECK(one.breakdown.quotient == doctest::Approx(res.grid_quotient).epsilon(1e-12));
}

TEST_CASE("certificates") {
  const auto c = certify(WaveguideSpec(2, 1.0, GapProfile::zero(), WallBc::Neumann), 1);
  CHECK(c.valid());
  CHECK(c.threshold == doctest::Approx(kPi * kPi / 16.0));
  const auto seg = certify(WaveguideSpec(2, 1.0, GapProfile::zero(), WallBc::Neumann, Variant::MidlineSegments), 1);
  CHECK(seg.valid());
  CHECK(seg.threshold == doctest::Approx(kPi * kPi / 16.0));
  CHECK(std::isnan(seg.q_closed_form));
  CHECK(certify_all(WaveguideSpec(3, 1.0, GapProfile::zero(), WallBc::Neumann)).size() == 3);
  CHECK(certify_all(WaveguideSpec(3, 1.0, GapProfile::zero(), WallBc::Dirichlet)).size() == 2);
  CHECK(certify_all(WaveguideSpec(1, 1.0, GapProfile::zero(), WallBc::Dirichlet)).empty());
  CHECK_THROWS_AS(certify(WaveguideSpec(2, 1.0, GapProfile::zero(), WallBc::Dirichlet), 2), InadmissibleClass);
}

TEST_CASE("closed-form identities by quadrature") {
  const auto r = verify_identities(WaveguideSpec(2, 1.0, GapProfile::zero(), WallBc::Neumann), 1);
  CHECK(r.max_residual < 1e-10);
  const auto bump = verify_identities(WaveguideSpec(4, 1.0, GapProfile::cosine(0.3), WallBc::Neumann), 2);
  CHECK(bump.max_residual < 1e-9);
  const auto one = verify_identities(WaveguideSpec(1, 1.0, GapProfile::zero(), WallBc::Neumann), 1);
  for (const auto& c : one.checks)
    if (c.name == "root_sum") CHECK(c.lhs == 0.0);
  CHECK_THROWS_AS(verify_identities(WaveguideSpec(2, 1.0, GapProfile::zero(), WallBc::Dirichlet), 1),
                  UnsupportedSetting);
}
