#include "trapmodes/testfun.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "trapmodes/errors.hpp"

namespace trapmodes {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

void validate(const TestParams& params, double a) {
  if (!(params.lambda > 0.0) || !std::isfinite(params.lambda))
    throw SpecError("lambda must be positive");
  if (!(params.alpha > 0.0) || !std::isfinite(params.alpha))
    throw SpecError("alpha must be positive");
  if (!(params.b >= 0.0 && params.b < a)) throw SpecError("b must lie in [0, a)");
}

double chi(double x, double a, double b) {
  const double ax = std::fabs(x);
  if (ax >= a) return 0.0;
  if (ax <= b) return 1.0;
  return (a - ax) / (a - b);
}

double chi_prime(double x, double a, double b) {
  const double ax = std::fabs(x);
  if (ax >= a || ax <= b) return 0.0;
  return x > 0.0 ? -1.0 / (a - b) : 1.0 / (a - b);
}

double psi(double x, double alpha, double a) {
  const double ax = std::fabs(x);
  return ax <= a ? 1.0 : std::exp(-alpha * (ax - a));
}

double psi_prime(double x, double alpha, double a) {
  const double ax = std::fabs(x);
  if (ax <= a) return 0.0;
  const double d = -alpha * std::exp(-alpha * (ax - a));
  return x > 0.0 ? d : -d;
}

std::vector<int> admissible_classes(const WaveguideSpec& spec) {
  std::vector<int> out;
  if (spec.variant() == Variant::Open) return out;
  const bool all_n =
      spec.variant() == Variant::CenteredObstacles && spec.wall_bc() == WallBc::Neumann;
  const int last = all_n ? spec.n() : spec.n() - 1;
  for (int m = 1; m <= last; ++m) out.push_back(m);
  return out;
}

namespace {

std::vector<double> gap_weights(const WaveguideSpec& spec) {
  const int n = spec.n();
  if (spec.variant() == Variant::MidlineSegments) return std::vector<double>(n, 2.0);
  std::vector<double> w(n + 1, 2.0);
  w.front() = 1.0;
  w.back() = 1.0;
  return w;
}

int dirichlet_source(int m, int n) {
  int best = 1;
  double best_val = -1.0;
  for (int j = 1; j <= n - 1; ++j) {
    const double s = std::fabs(std::sin(m * kPi * j / n));
    if (s > best_val + 1e-12) {
      best_val = s;
      best = j;
    }
  }
  return best;
}

void check_admissible(const WaveguideSpec& spec, int m) {
  const int n = spec.n();
  std::ostringstream os;
  if (spec.variant() == Variant::Open) {
    os << "an open strip has no trial construction";
    throw InadmissibleClass(os.str());
  }
  if (m < 1 || m > n) {
    os << "class m=" << m << " outside 1.." << n;
    throw InadmissibleClass(os.str());
  }
  if (spec.wall_bc() == WallBc::Dirichlet && m == n) {
    os << "Dirichlet profile vanishes identically for m=N=" << n;
    throw InadmissibleClass(os.str());
  }
  if (spec.variant() == Variant::MidlineSegments && m == n) {
    os << "segment profile vanishes identically for m=N=" << n;
    throw InadmissibleClass(os.str());
  }
}

}  // namespace

std::vector<double> closed_form_profile(const WaveguideSpec& spec, int m, int source_index) {
  const int n = spec.n();
  const double gam = gamma(m, n);
  std::vector<double> out;
  if (spec.variant() == Variant::MidlineSegments) {
    // 0-based gap index s: (gamma/N) cos(m pi / 2N) cos(m pi (s + 1/2) / N)
    for (int s = 0; s < n; ++s)
      out.push_back(gam / n * std::cos(m * kPi / (2.0 * n)) * std::cos(m * kPi * (s + 0.5) / n));
    return out;
  }
  if (spec.wall_bc() == WallBc::Dirichlet) {
    const int j = source_index;
    for (int s = 0; s <= n; ++s)
      out.push_back(gam / n * std::sin(m * kPi * j / n) * std::sin(m * kPi * s / n));
    return out;
  }
  for (int j = 0; j <= n; ++j) out.push_back(gam / (2.0 * n) * std::cos(m * kPi * j / n));
  return out;
}

TransverseProfile transverse_profile(const WaveguideSpec& spec, int m) {
  check_admissible(spec, m);
  const int n = spec.n();
  TransverseProfile prof;
  prof.m = m;
  prof.variant = spec.variant();
  prof.bc = spec.wall_bc();
  prof.weights = gap_weights(spec);
  const GapLattice lattice = gap_lattice(spec.variant());
  std::vector<double> indicator(prof.weights.size(), 0.0);
  if (spec.variant() == Variant::CenteredObstacles && spec.wall_bc() == WallBc::Dirichlet) {
    prof.source_index = dirichlet_source(m, n);
    prof.orientation = std::sin(m * kPi * prof.source_index / n) < 0.0 ? -1.0 : 1.0;
  }
  indicator[static_cast<std::size_t>(prof.source_index)] = prof.orientation;
  prof.values = project_gaps(lattice, n, indicator, m, spec.wall_bc());

  const auto closed = closed_form_profile(spec, m, prof.source_index);
  bool nonzero = false;
  for (std::size_t s = 0; s < prof.values.size(); ++s) {
    if (std::fabs(prof.orientation * closed[s] - prof.values[s]) > 1e-12)
      throw std::logic_error("transverse profile disagrees with its closed form");
    if (std::fabs(prof.values[s]) > 1e-14) nonzero = true;
  }
  if (!nonzero) throw InadmissibleClass("transverse profile vanishes identically");
  return prof;
}

double v_norm_sq(const TransverseProfile& profile) {
  double acc = 0.0;
  for (std::size_t s = 0; s < profile.values.size(); ++s)
    acc += profile.weights[s] * profile.values[s] * profile.values[s];
  return acc;
}

TestFunction::TestFunction(const WaveguideSpec& spec, int m, const TestParams& params)
    : spec_(spec),
      m_(m),
      params_(params),
      profile_(transverse_profile(spec, m)),
      p_(m * kPi / (2.0 * spec.n())) {}

double TestFunction::trig(double y) const {
  return spec_.wall_bc() == WallBc::Neumann ? std::cos(p_ * y) : std::sin(p_ * y);
}

double TestFunction::trig_prime(double y) const {
  return spec_.wall_bc() == WallBc::Neumann ? -p_ * std::sin(p_ * y) : p_ * std::cos(p_ * y);
}

double TestFunction::v(double x, double y) const {
  if (std::fabs(x) > spec_.a()) return 0.0;
  const auto gaps = gap_intervals(spec_, x);
  for (std::size_t s = 0; s < gaps.size(); ++s)
    if (gaps[s].contains(y)) return profile_.values[s];
  return 0.0;
}

double TestFunction::operator()(double x, double y) const {
  const double a = spec_.a();
  return chi(x, a, params_.b) * v(x, y) + params_.lambda * psi(x, params_.alpha, a) * trig(y);
}

std::array<double, 2> TestFunction::gradient(double x, double y) const {
  const double a = spec_.a();
  const double dx = chi_prime(x, a, params_.b) * v(x, y) +
                    params_.lambda * psi_prime(x, params_.alpha, a) * trig(y);
  const double dy = params_.lambda * psi(x, params_.alpha, a) * trig_prime(y);
  return {dx, dy};
}

double phi(const WaveguideSpec& spec, int m, const TestParams& params, double x, double y) {
  if (!in_domain(spec, x, y)) throw OutOfDomain("phi evaluated outside the free region");
  return TestFunction(spec, m, params)(x, y);
}

}  // namespace trapmodes
