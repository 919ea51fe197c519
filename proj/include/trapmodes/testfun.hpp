#pragma once

// Trial functions phi(x, y) = chi(x) v(y) + lambda psi_alpha(x) T(m pi y / 2N),
// T = cos for Neumann walls and sin for Dirichlet walls.

#include <array>
#include <vector>

#include "trapmodes/geometry.hpp"
#include "trapmodes/symmetry.hpp"

namespace trapmodes {

struct TestParams {
  double lambda = 1.0;  ///< weight of the transverse-mode tail term
  double alpha = 1.0;   ///< decay rate of the tail
  double b = 0.0;       ///< plateau half-width of chi, 0 <= b < a
};

/// Throws SpecError unless lambda > 0, alpha > 0, 0 <= b < a.
void validate(const TestParams& params, double a);

/// Trapezoidal cutoff: 1 on |x| < b, linear ramps to 0 at |x| = a.
double chi(double x, double a, double b);
/// One-sided derivative of chi (0 on the plateau and outside).
double chi_prime(double x, double a, double b);
/// 1 on |x| <= a, exp(-alpha (|x| - a)) outside.
double psi(double x, double alpha, double a);
double psi_prime(double x, double alpha, double a);

/// Classes m for which the trial function is available in this setting.
std::vector<int> admissible_classes(const WaveguideSpec& spec);

/// Per-gap constant values of the transverse factor v, aligned with
/// gap_intervals(spec, x) for |x| <= a.
struct TransverseProfile {
  std::vector<double> values;
  std::vector<double> weights;  ///< gap length at g = 0
  int m = 0;
  Variant variant = Variant::CenteredObstacles;
  WallBc bc = WallBc::Neumann;
  int source_index = 0;   ///< gap whose indicator was projected
  double orientation = 1.0;  ///< sign applied to that indicator
};

/// Projects the indicator of the source gap onto S_m and checks the result
/// against the closed forms. Throws InadmissibleClass for degenerate classes.
TransverseProfile transverse_profile(const WaveguideSpec& spec, int m);

/// The closed-form per-gap values for the same construction (oracle side).
std::vector<double> closed_form_profile(const WaveguideSpec& spec, int m, int source_index);

/// sum_s weight_s v_s^2, so that the y-integral of v^2 over the gaps at x
/// equals v_norm_sq * (1 - g(x)).
double v_norm_sq(const TransverseProfile& profile);

/// Evaluator for one (spec, m, params) triple.
class TestFunction {
 public:
  TestFunction(const WaveguideSpec& spec, int m, const TestParams& params);

  double operator()(double x, double y) const;
  /// (d/dx, d/dy) at an interior point of the free region.
  std::array<double, 2> gradient(double x, double y) const;

  double p() const { return p_; }
  /// cos(p y) or sin(p y)
  double trig(double y) const;
  double trig_prime(double y) const;
  const TransverseProfile& profile() const { return profile_; }
  const TestParams& params() const { return params_; }
  const WaveguideSpec& spec() const { return spec_; }

  /// v at (x, y); zero outside |x| <= a or on an obstacle.
  double v(double x, double y) const;

 private:
  WaveguideSpec spec_;
  int m_;
  TestParams params_;
  TransverseProfile profile_;
  double p_;
};

/// phi(x, y); throws OutOfDomain when (x, y) is not in the free region.
double phi(const WaveguideSpec& spec, int m, const TestParams& params, double x, double y);

}  // namespace trapmodes
