#pragma once

#include <functional>
#include <span>
#include <vector>

namespace trapmodes {

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
};

/// Deterministic Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). The initial simplex is x0 plus x0 + steps[i] e_i. Stops after
/// max_evals objective calls or when the simplex has collapsed.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> x0, std::vector<double> steps, int max_evals,
                             double xtol = 1e-10, double ftol = 1e-16);

}  // namespace trapmodes
