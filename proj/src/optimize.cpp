#include "trapmodes/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace trapmodes {

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> x0, std::vector<double> steps, int max_evals,
                             double xtol, double ftol) {
  const std::size_t dim = x0.size();
  if (steps.size() != dim) throw std::invalid_argument("nelder_mead: steps/x0 size mismatch");
  NelderMeadResult best;
  best.x = x0;
  if (max_evals <= 0) {
    best.value = std::numeric_limits<double>::quiet_NaN();
    return best;
  }

  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<std::vector<double>> simplex{x0};
  std::vector<double> values{eval(x0)};
  for (std::size_t i = 0; i < dim && evals < max_evals; ++i) {
    auto x = x0;
    x[i] += steps[i];
    simplex.push_back(x);
    values.push_back(eval(x));
  }
  auto finish = [&]() {
    const auto it = std::min_element(values.begin(), values.end());
    const auto k = static_cast<std::size_t>(it - values.begin());
    best.x = simplex[k];
    best.value = values[k];
    best.evaluations = evals;
    return best;
  };
  if (simplex.size() < dim + 1) return finish();

  std::vector<std::size_t> order(dim + 1);
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    const std::size_t lo = order.front();
    const std::size_t hi = order.back();
    const std::size_t second = order[dim - 1];

    double spread = 0.0;
    for (std::size_t k = 0; k <= dim; ++k)
      for (std::size_t i = 0; i < dim; ++i)
        spread = std::max(spread, std::fabs(simplex[k][i] - simplex[lo][i]));
    if (spread < xtol && std::fabs(values[hi] - values[lo]) <= ftol * (std::fabs(values[lo]) + 1e-300))
      break;

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t k = 0; k <= dim; ++k) {
      if (k == hi) continue;
      for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[k][i] / static_cast<double>(dim);
    }
    auto along = [&](double t) {
      std::vector<double> x(dim);
      for (std::size_t i = 0; i < dim; ++i) x[i] = centroid[i] + t * (simplex[hi][i] - centroid[i]);
      return x;
    };

    auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < values[lo]) {
      if (evals >= max_evals) {
        simplex[hi] = xr;
        values[hi] = fr;
        break;
      }
      auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[hi] = xe;
        values[hi] = fe;
      } else {
        simplex[hi] = xr;
        values[hi] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[hi] = xr;
      values[hi] = fr;
      continue;
    }
    if (evals >= max_evals) break;
    const bool outside = fr < values[hi];
    auto xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : values[hi])) {
      simplex[hi] = xc;
      values[hi] = fc;
      continue;
    }
    for (std::size_t k = 0; k <= dim && evals < max_evals; ++k) {
      if (k == lo) continue;
      for (std::size_t i = 0; i < dim; ++i)
        simplex[k][i] = simplex[lo][i] + 0.5 * (simplex[k][i] - simplex[lo][i]);
      values[k] = eval(simplex[k]);
    }
  }
  return finish();
}

}  // namespace trapmodes
