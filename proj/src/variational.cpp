#include "trapmodes/variational.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

#include "trapmodes/errors.hpp"
#include "trapmodes/optimize.hpp"
#include "trapmodes/quadrature.hpp"
#include "trapmodes/symmetry.hpp"

namespace trapmodes {

namespace {

constexpr double kPi = std::numbers::pi;

double class_p(int m, int n) { return m * kPi / (2.0 * n); }

std::vector<double> x_breaks(const WaveguideSpec& spec, double b) {
  const double a = spec.a();
  std::vector<double> br{-a, -b, b, a};
  if (spec.variant() == Variant::CenteredObstacles)
    for (double t : spec.profile_breakpoints()) br.push_back(t);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  return br;
}

bool obstacle_neumann(const WaveguideSpec& spec) {
  return spec.variant() == Variant::CenteredObstacles && spec.wall_bc() == WallBc::Neumann;
}

/// ∫ dx Σ_gaps ∫ dy f(x, y) over the pieces in `breaks`.
template <std::size_t K, class F>
std::array<double, K> integrate_free_region(const WaveguideSpec& spec,
                                            const std::vector<double>& breaks, const F& f,
                                            double rtol, bool& converged) {
  quad::Stats outer;
  auto column = [&](double x) {
    std::array<double, K> acc{};
    for (const auto& gap : gap_intervals(spec, x)) {
      if (!(gap.length() > 0.0)) continue;
      quad::Stats inner;
      const auto r = quad::integrate<K>([&](double y) { return f(x, y); }, gap.lo, gap.hi,
                                        rtol, &inner);
      if (!inner.converged) converged = false;
      for (std::size_t k = 0; k < K; ++k) acc[k] += r[k];
    }
    return acc;
  };
  const auto out = quad::integrate<K>(column, std::span<const double>(breaks), rtol, &outer);
  if (!outer.converged) converged = false;
  return out;
}

InteriorForms forms_from_moments(const XMoments& mom, double vn, int n, int m, double p) {
  InteriorForms f;
  f.chi2_vv = vn * mom.plateau;
  f.chi_vt = 2.0 * n / (m * kPi) * mom.cross;
  f.tt = n * mom.gap + mom.defect;
  f.dchi2_vv = vn * mom.ramp;
  f.dd = p * p * (n * mom.gap - mom.defect);
  f.converged = mom.converged;
  return f;
}

void require_obstacle_neumann(const WaveguideSpec& spec, const char* what) {
  if (!obstacle_neumann(spec))
    throw UnsupportedSetting(std::string(what) +
                             " is only available for Neumann walls around centered obstacles");
}

QuotientBreakdown closed_form(const WaveguideSpec& spec, int m, const TestParams& params,
                              bool printed) {
  const TransverseProfile prof = transverse_profile(spec, m);
  validate(params, spec.a());
  const int n = spec.n();
  const double p = class_p(m, n);
  const double vn = v_norm_sq(prof);
  const XMoments mom = x_moments(spec, m, params.b);
  const double c = printed ? (m == n ? 8.0 : 4.0) : 4.0 / n;
  const double kappa = c * n * n / (m * kPi);
  const double defect = printed ? 0.0 : mom.defect;
  const double lam = params.lambda;
  const double al = params.alpha;

  QuotientBreakdown q;
  q.p = p;
  q.c_const = c;
  q.numerator_excess = lam * lam * al * n + vn * (mom.ramp - p * p * mom.plateau) -
                       lam * kappa * p * p * mom.cross - 2.0 * lam * lam * p * p * defect;
  q.denominator = lam * lam * n / al + lam * lam * (n * mom.gap + defect) +
                  lam * kappa * mom.cross + vn * mom.plateau;
  q.quotient = p * p + q.numerator_excess / q.denominator;
  q.converged = mom.converged;
  return q;
}

}  // namespace

InteriorForms interior_forms(const WaveguideSpec& spec, const TransverseProfile& profile, double b,
                             double rtol) {
  const double a = spec.a();
  const double p = class_p(profile.m, spec.n());
  const bool dirichlet = spec.wall_bc() == WallBc::Dirichlet;
  bool converged = true;
  quad::Stats outer;

  auto column = [&](double x) {
    double g_vv = 0.0, g_vt = 0.0, g_tt = 0.0, g_dd = 0.0;
    const auto gaps = gap_intervals(spec, x);
    for (std::size_t s = 0; s < gaps.size(); ++s) {
      const double len = gaps[s].length();
      if (!(len > 0.0)) continue;
      auto f = [&](double y) {
        const double t = dirichlet ? std::sin(p * y) : std::cos(p * y);
        const double tp = dirichlet ? p * std::cos(p * y) : -p * std::sin(p * y);
        return std::array<double, 3>{t, t * t, tp * tp};
      };
      quad::Stats inner;
      const auto r = quad::integrate<3>(f, gaps[s].lo, gaps[s].hi, rtol, &inner);
      if (!inner.converged) converged = false;
      const double v = profile.values[s];
      g_vv += v * v * len;
      g_vt += v * r[0];
      g_tt += r[1];
      g_dd += r[2];
    }
    const double c = chi(x, a, b);
    const double cp = chi_prime(x, a, b);
    return std::array<double, 5>{c * c * g_vv, c * g_vt, g_tt, cp * cp * g_vv, g_dd};
  };
  const auto br = x_breaks(spec, b);
  const auto r = quad::integrate<5>(column, std::span<const double>(br), rtol, &outer);
  InteriorForms f;
  f.chi2_vv = r[0];
  f.chi_vt = r[1];
  f.tt = r[2];
  f.dchi2_vv = r[3];
  f.dd = r[4];
  f.converged = converged && outer.converged;
  return f;
}

QuotientBreakdown assemble_quotient(const InteriorForms& forms, int n, double p, double lambda,
                                    double alpha) {
  const double l2 = lambda * lambda;
  const double mass = forms.chi2_vv + 2.0 * lambda * forms.chi_vt + l2 * (forms.tt + n / alpha);
  const double energy = forms.dchi2_vv + l2 * (forms.dd + p * p * n / alpha + alpha * n);
  QuotientBreakdown q;
  q.p = p;
  q.denominator = mass;
  q.numerator_excess = energy - p * p * mass;
  q.quotient = p * p + q.numerator_excess / q.denominator;
  q.converged = forms.converged;
  return q;
}

XMoments x_moments(const WaveguideSpec& spec, int m, double b, double rtol) {
  const double a = spec.a();
  const int n = spec.n();
  const double p = class_p(m, n);
  XMoments mom;
  if (spec.profile().is_zero() || spec.variant() != Variant::CenteredObstacles) {
    mom.ramp = 2.0 / (a - b);
    mom.cross = std::sin(p) * (a + b);
    mom.gap = 2.0 * a;
    mom.plateau = 2.0 * b + 2.0 * (a - b) / 3.0;
    mom.defect = 0.0;
    return mom;
  }
  const bool top = m == n;
  auto f = [&](double x) {
    const double g = spec.g(x);
    const double c = chi(x, a, b);
    const double cp = chi_prime(x, a, b);
    return std::array<double, 5>{(1.0 - g) * cp * cp, c * std::sin(p * (1.0 - g)), 1.0 - g,
                                 c * c * (1.0 - g), top ? n * std::sin(kPi * g) / kPi : 0.0};
  };
  quad::Stats st;
  const auto br = x_breaks(spec, b);
  const auto r = quad::integrate<5>(f, std::span<const double>(br), rtol, &st);
  mom.ramp = r[0];
  mom.cross = r[1];
  mom.gap = r[2];
  mom.plateau = r[3];
  mom.defect = r[4];
  mom.converged = st.converged;
  return mom;
}

QuotientBreakdown quotient_closed_form(const WaveguideSpec& spec, int m, const TestParams& params) {
  require_obstacle_neumann(spec, "the closed-form quotient");
  return closed_form(spec, m, params, false);
}

QuotientBreakdown quotient_as_printed(const WaveguideSpec& spec, int m, const TestParams& params) {
  require_obstacle_neumann(spec, "the closed-form quotient");
  return closed_form(spec, m, params, true);
}

QuotientBreakdown quotient_quadrature(const WaveguideSpec& spec, int m, const TestParams& params,
                                      double rtol) {
  const TransverseProfile prof = transverse_profile(spec, m);
  validate(params, spec.a());
  const InteriorForms forms = interior_forms(spec, prof, params.b, rtol);
  return assemble_quotient(forms, spec.n(), class_p(m, spec.n()), params.lambda, params.alpha);
}

OptimizationResult optimize_params(const WaveguideSpec& spec, int m, int budget) {
  const TransverseProfile prof = transverse_profile(spec, m);
  const int n = spec.n();
  const double a = spec.a();
  const double p = class_p(m, n);
  const bool closed = obstacle_neumann(spec);
  const double vn = v_norm_sq(prof);

  auto forms_at = [&](double b) {
    if (closed) return forms_from_moments(x_moments(spec, m, b), vn, n, m, p);
    return interior_forms(spec, prof, b, 1e-9);
  };

  OptimizationResult res;
  double best = std::numeric_limits<double>::infinity();
  const double b_grid[] = {0.0, 0.25 * a, 0.5 * a, 0.75 * a, 0.95 * a};
  for (double b : b_grid) {
    const InteriorForms f = forms_at(b);
    for (int i = 0; i < 25; ++i) {
      const double lam = std::pow(10.0, -2.0 + 6.0 * i / 24.0);
      for (int j = 0; j < 25; ++j) {
        const double al = std::pow(10.0, -4.0 + 6.0 * j / 24.0);
        const double q = assemble_quotient(f, n, p, lam, al).quotient;
        if (q < best) {
          best = q;
          res.grid_params = {lam, al, b};
        }
      }
    }
  }
  res.grid_quotient = best;
  res.params = res.grid_params;

  auto unpack = [&](std::span<const double> z) {
    TestParams t;
    t.lambda = std::exp(std::clamp(z[0], -60.0, 60.0));
    t.alpha = std::exp(std::clamp(z[1], -60.0, 60.0));
    t.b = a * std::clamp(z[2], 0.0, 0.999);
    return t;
  };
  auto objective = [&](std::span<const double> z) {
    const TestParams t = unpack(z);
    return assemble_quotient(forms_at(t.b), n, p, t.lambda, t.alpha).quotient;
  };

  if (budget > 0) {
    const double rb = res.grid_params.b / a;
    const double step = 0.25 * std::log(10.0);
    std::vector<double> x0{std::log(res.grid_params.lambda), std::log(res.grid_params.alpha), rb};
    std::vector<double> steps{step, step, rb + 0.05 <= 0.999 ? 0.05 : -0.05};
    const NelderMeadResult nm = nelder_mead(objective, x0, steps, budget);
    res.evaluations = nm.evaluations;
    if (nm.value < best && nm.x != x0) res.params = unpack(nm.x);
  }
  res.breakdown = assemble_quotient(forms_at(res.params.b), n, p, res.params.lambda,
                                    res.params.alpha);
  if (closed) res.breakdown.c_const = 4.0 / n;
  return res;
}

BoundCertificate evaluate_certificate(const WaveguideSpec& spec, int m, int budget) {
  const OptimizationResult opt = optimize_params(spec, m, budget);
  const QuotientBreakdown q = quotient_quadrature(spec, m, opt.params, kQuadratureTolerance);
  BoundCertificate cert;
  cert.m = m;
  cert.threshold = threshold(m, spec.n(), spec.wall_bc());
  cert.q_star = q.quotient;
  cert.params = opt.params;
  cert.margin = cert.threshold - cert.q_star;
  cert.verified_by_quadrature =
      q.converged && cert.margin > 10.0 * kQuadratureTolerance * cert.threshold;
  cert.q_optimizer = opt.breakdown.quotient;
  cert.q_closed_form = obstacle_neumann(spec) ? quotient_closed_form(spec, m, opt.params).quotient
                                              : std::numeric_limits<double>::quiet_NaN();
  cert.evaluations = opt.evaluations;
  return cert;
}

BoundCertificate certify(const WaveguideSpec& spec, int m, int budget) {
  BoundCertificate cert = evaluate_certificate(spec, m, budget);
  if (!cert.valid()) throw CertificationFailed(m, cert.margin);
  return cert;
}

std::vector<BoundCertificate> evaluate_all(const WaveguideSpec& spec, int budget) {
  std::vector<std::future<BoundCertificate>> jobs;
  for (int m : admissible_classes(spec))
    jobs.push_back(std::async(std::launch::async,
                              [&spec, m, budget] { return evaluate_certificate(spec, m, budget); }));
  std::vector<BoundCertificate> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::vector<BoundCertificate> certify_all(const WaveguideSpec& spec, int budget) {
  auto certs = evaluate_all(spec, budget);
  for (const auto& c : certs)
    if (!c.valid()) throw CertificationFailed(c.m, c.margin);
  return certs;
}

IdentityReport verify_identities(const WaveguideSpec& spec, int m, double rtol) {
  require_obstacle_neumann(spec, "identity verification");
  const int n = spec.n();
  const double a = spec.a();
  const double p = class_p(m, n);
  IdentityReport rep;
  rep.m = m;
  rep.params = {1.3, 0.7, 0.5 * a};
  const TestFunction tf(spec, m, rep.params);
  const double b = rep.params.b;
  const double vn = v_norm_sq(tf.profile());
  const XMoments mom = x_moments(spec, m, b, rtol);
  bool conv = true;

  auto add = [&](std::string name, double lhs, double rhs, double printed, bool applicable) {
    IdentityCheck c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.printed_rhs = printed;
    c.applicable = applicable;
    if (applicable) {
      const double scale = std::max(1.0, std::fabs(rhs));
      c.residual = std::fabs(lhs - rhs) / scale;
      c.printed_residual = std::fabs(lhs - printed) / std::max(1.0, std::fabs(printed));
      rep.max_residual = std::max(rep.max_residual, c.residual);
      rep.max_printed_residual = std::max(rep.max_printed_residual, c.printed_residual);
    }
    rep.checks.push_back(std::move(c));
  };

  const auto inner = x_breaks(spec, b);
  {
    const auto r = integrate_free_region<1>(
        spec, inner,
        [&](double, double y) {
          const double c = std::cos(p * y);
          return std::array<double, 1>{c * c};
        },
        rtol, conv);
    add("cos_integral", r[0], n * mom.gap + mom.defect, n * mom.gap, true);
  }
  {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += std::cos(2.0 * m * kPi * i / n);
    if (m < n)
      add("root_sum", sum, 0.0, 0.0, true);
    else
      add("root_sum", n > 1 ? sum : 0.0, 0.0, 0.0, false);
  }
  {
    const auto r = integrate_free_region<1>(
        spec, inner,
        [&](double x, double y) {
          return std::array<double, 1>{chi(x, a, b) * tf.v(x, y) * std::cos(p * y)};
        },
        rtol, conv);
    const double c_printed = m == n ? 8.0 : 4.0;
    add("cross_term", r[0], 2.0 * n / (m * kPi) * mom.cross,
        0.5 * c_printed * n * n / (m * kPi) * mom.cross, true);
  }
  {
    const auto r = integrate_free_region<1>(
        spec, inner,
        [&](double x, double y) {
          const double t = chi(x, a, b) * tf.v(x, y);
          return std::array<double, 1>{t * t};
        },
        rtol, conv);
    add("profile_mass", r[0], vn * mom.plateau, vn * mom.plateau, true);
  }
  {
    const double reach = 60.0 / rep.params.alpha;
    auto whole = inner;
    whole.insert(whole.begin(), -a - reach);
    whole.push_back(a + reach);
    const auto r = integrate_free_region<2>(
        spec, whole,
        [&](double x, double y) {
          const double u = tf(x, y);
          const auto gr = tf.gradient(x, y);
          return std::array<double, 2>{u * u, gr[0] * gr[0] + gr[1] * gr[1]};
        },
        rtol, conv);
    const QuotientBreakdown cf = closed_form(spec, m, rep.params, false);
    const QuotientBreakdown pr = closed_form(spec, m, rep.params, true);
    add("mass", r[0], cf.denominator, pr.denominator, true);
    add("energy", r[1], cf.numerator_excess + p * p * cf.denominator,
        pr.numerator_excess + p * p * pr.denominator, true);
  }
  rep.converged = conv;
  return rep;
}

}  // namespace trapmodes
