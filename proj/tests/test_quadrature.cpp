#include <doctest.h>

#include <cmath>
#include <numbers>

#include "trapmodes/optimize.hpp"
#include "trapmodes/quadrature.hpp"

using namespace trapmodes;

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  for (int n : {1, 2, 5, 16, 24}) {
    const auto r = quad::gauss_legendre(n);
    for (int deg = 0; deg < 2 * n; ++deg) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("adaptive integration handles kinks at breakpoints and peaks") {
  const std::vector<double> br{-1.0, 0.3, 2.0};
  auto f = [](double x) { return std::array<double, 2>{std::fabs(x - 0.3), std::exp(-400.0 * x * x)}; };
  quad::Stats st;
  const auto r = quad::integrate<2>(f, std::span<const double>(br), 1e-12, &st);
  CHECK(st.converged);
  CHECK(r[0] == doctest::Approx(0.5 * 1.3 * 1.3 + 0.5 * 1.7 * 1.7).epsilon(1e-13));
  CHECK(r[1] == doctest::Approx(std::sqrt(std::numbers::pi / 400.0)).epsilon(1e-11));
}

TEST_CASE("Nelder-Mead minimizes the Rosenbrock function") {
  auto rosen = [](std::span<const double> x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  const auto r = nelder_mead(rosen, {-1.2, 1.0}, {0.5, 0.5}, 5000, 1e-12);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.evaluations <= 5000);
}

TEST_CASE("Nelder-Mead with a single evaluation returns the start point") {
  int calls = 0;
  auto f = [&](std::span<const double> x) {
    ++calls;
    return x[0] * x[0];
  };
  const auto r = nelder_mead(f, {3.0}, {1.0}, 1);
  CHECK(calls == 1);
  CHECK(r.x[0] == 3.0);
  CHECK(r.value == 9.0);
}
