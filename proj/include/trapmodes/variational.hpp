#pragma once

// Rayleigh quotients of the trial functions, their optimization over
// (lambda, alpha, b), and the resulting upper-bound certificates.

#include <string>
#include <vector>

#include "trapmodes/geometry.hpp"
#include "trapmodes/testfun.hpp"

namespace trapmodes {

struct QuotientBreakdown {
  double numerator_excess = 0.0;  ///< ∫|∇φ|² − p² ∫|φ|²
  double denominator = 0.0;       ///< ∫|φ|²
  double quotient = 0.0;          ///< p² + numerator_excess / denominator
  double p = 0.0;
  double c_const = 0.0;           ///< cross-term constant C in C N²/(mπ)
  bool converged = true;
};

/// The five pieces of the quadratic form over |x| <= a for a fixed plateau b.
/// With T the transverse mode and the sums running over the gaps at x:
///   chi2_vv  = ∫ χ² Σ∫ v²        chi_vt = ∫ χ Σ∫ v T      tt = ∫ Σ∫ T²
///   dchi2_vv = ∫ χ'² Σ∫ v²       dd     = ∫ Σ∫ (T')²
struct InteriorForms {
  double chi2_vv = 0.0;
  double chi_vt = 0.0;
  double tt = 0.0;
  double dchi2_vv = 0.0;
  double dd = 0.0;
  bool converged = true;
};

/// Interior forms by nested adaptive quadrature (x outer, y per gap).
InteriorForms interior_forms(const WaveguideSpec& spec, const TransverseProfile& profile, double b,
                             double rtol);

/// Adds the analytic |x| > a tails and assembles the quotient. lambda = 0 is
/// accepted here (the pure plateau limit).
QuotientBreakdown assemble_quotient(const InteriorForms& forms, int n, double p, double lambda,
                                    double alpha);

/// x-moments entering the obstacle closed form:
///   ramp = ∫(1−g)χ'², cross = ∫χ sin(p(1−g)), gap = ∫(1−g), plateau = ∫χ²(1−g),
///   defect = ∫ N sin(πg)/π (only nonzero for m = N).
struct XMoments {
  double ramp = 0.0;
  double cross = 0.0;
  double gap = 0.0;
  double plateau = 0.0;
  double defect = 0.0;
  bool converged = true;
};

XMoments x_moments(const WaveguideSpec& spec, int m, double b, double rtol = 1e-12);

/// Closed form for Neumann walls around centered obstacles. The cross term
/// uses C = 4/N and the m = N cosine integral carries the defect term.
/// Throws UnsupportedSetting in the other settings.
QuotientBreakdown quotient_closed_form(const WaveguideSpec& spec, int m, const TestParams& params);

/// The same closed form with C = 4 (m < N), C = 8 (m = N) and no defect term,
/// kept for comparison. Only exact for N = 1 without the m = N defect.
QuotientBreakdown quotient_as_printed(const WaveguideSpec& spec, int m, const TestParams& params);

/// Direct quadrature of ∫|∇φ|² and ∫|φ|² in every setting.
QuotientBreakdown quotient_quadrature(const WaveguideSpec& spec, int m, const TestParams& params,
                                      double rtol = 1e-10);

struct OptimizationResult {
  TestParams params;
  QuotientBreakdown breakdown;
  TestParams grid_params;  ///< best coarse-grid point
  double grid_quotient = 0.0;
  int evaluations = 0;     ///< simplex evaluations used
};

/// Log grids in lambda and alpha, five plateau widths, then a simplex
/// refinement in (log lambda, log alpha, b/a) limited to `budget` calls.
OptimizationResult optimize_params(const WaveguideSpec& spec, int m, int budget = 2000);

inline constexpr double kQuadratureTolerance = 1e-10;
inline constexpr int kDefaultBudget = 2000;

struct BoundCertificate {
  int m = 0;
  double threshold = 0.0;
  double q_star = 0.0;
  TestParams params;
  double margin = 0.0;
  bool verified_by_quadrature = false;
  double q_optimizer = 0.0;   ///< quotient seen by the optimizer at params
  double q_closed_form = 0.0; ///< NaN outside the obstacle/Neumann setting
  int evaluations = 0;

  bool valid() const { return margin > 0.0 && verified_by_quadrature; }
};

/// Runs the optimizer, recomputes Q at the winner by quadrature and accepts
/// iff margin > 10 * tolerance * threshold. Throws CertificationFailed
/// otherwise; InadmissibleClass for a bad m.
BoundCertificate certify(const WaveguideSpec& spec, int m, int budget = kDefaultBudget);

/// Like certify but never throws CertificationFailed; the returned record
/// carries the (possibly negative) margin.
BoundCertificate evaluate_certificate(const WaveguideSpec& spec, int m, int budget = kDefaultBudget);

/// evaluate_certificate over the admissible classes, in increasing m. Classes
/// are processed concurrently and merged by index.
std::vector<BoundCertificate> evaluate_all(const WaveguideSpec& spec, int budget = kDefaultBudget);

/// evaluate_all, then throws CertificationFailed for the first failing m.
std::vector<BoundCertificate> certify_all(const WaveguideSpec& spec, int budget = kDefaultBudget);

struct IdentityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;        ///< |lhs − rhs| / max(1, |rhs|)
  double printed_rhs = 0.0;     ///< right side in its originally printed form
  double printed_residual = 0.0;
  bool applicable = true;
};

struct IdentityReport {
  int m = 0;
  TestParams params;  ///< parameters used for the assembly checks
  std::vector<IdentityCheck> checks;
  double max_residual = 0.0;          ///< over applicable checks
  double max_printed_residual = 0.0;
  bool converged = true;  ///< every quadrature met its tolerance
};

/// Checks the cosine-integral, root-of-unity, cross-term, profile-mass and
/// full mass/energy identities by quadrature independent of the closed form.
/// Neumann walls around centered obstacles only (UnsupportedSetting else).
IdentityReport verify_identities(const WaveguideSpec& spec, int m, double rtol = 1e-12);

}  // namespace trapmodes
