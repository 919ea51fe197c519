#include "trapmodes/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "trapmodes/errors.hpp"

namespace trapmodes {

namespace {

int positive_mod(long long k, long long period) {
  const long long r = k % period;
  return static_cast<int>(r < 0 ? r + period : r);
}

double bc_sign(WallBc bc) { return bc == WallBc::Neumann ? 1.0 : -1.0; }

}  // namespace

double coefficient(int m, int n, int big_n) {
  if (big_n < 1) throw std::invalid_argument("coefficient: N must be >= 1");
  int k = positive_mod(static_cast<long long>(m) * n, 2LL * big_n);
  if (k > big_n) k = 2 * big_n - k;
  if (k == 0) return 1.0;
  if (k == big_n) return -1.0;
  if (2 * k == big_n) return 0.0;
  return std::cos(std::numbers::pi * k / big_n);
}

double gamma(int m, int big_n) {
  if (m < 0 || m > big_n) throw std::invalid_argument("gamma: need 0 <= m <= N");
  return 2.0 / (1.0 + (m == 0 ? 1.0 : 0.0) + (m == big_n ? 1.0 : 0.0));
}

double threshold(int m, int big_n, WallBc bc) {
  if (m < 0 || m > big_n) throw std::invalid_argument("threshold: need 0 <= m <= N");
  constexpr double pi = std::numbers::pi;
  if (bc == WallBc::Dirichlet && m == 0) return pi * pi;
  const double p = m * pi / (2.0 * big_n);
  return p * p;
}

TransverseFunction::TransverseFunction(int n, int per_unit, std::vector<double> samples)
    : n_(n), per_unit_(per_unit), samples_(std::move(samples)) {
  if (n_ < 1) throw std::invalid_argument("TransverseFunction: N must be >= 1");
  if (per_unit_ < 1 || (per_unit_ & (per_unit_ - 1)) != 0)
    throw std::invalid_argument("TransverseFunction: resolution must be a power of two");
  if (samples_.size() != static_cast<std::size_t>(2 * n_ * per_unit_ + 1))
    throw std::invalid_argument("TransverseFunction: expected 2N*K + 1 samples");
  for (double v : samples_)
    if (!std::isfinite(v)) throw std::invalid_argument("TransverseFunction: non-finite sample");
}

TransverseFunction TransverseFunction::sample(int n, int per_unit,
                                              const std::function<double(double)>& f) {
  std::vector<double> s(static_cast<std::size_t>(2 * n * per_unit + 1));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = f(static_cast<double>(i) / per_unit);
  return TransverseFunction(n, per_unit, std::move(s));
}

double TransverseFunction::operator()(double y) const {
  const double t = std::clamp(y, 0.0, 2.0 * n_) * per_unit_;
  auto i = static_cast<std::size_t>(std::floor(t));
  if (i >= samples_.size() - 1) return samples_.back();
  const double w = t - static_cast<double>(i);
  return (1.0 - w) * samples_[i] + w * samples_[i + 1];
}

double Extension::operator()(double y) const {
  const double period = 4.0 * f_.n();
  const double top = 2.0 * f_.n();
  double r = std::fmod(y, period);
  if (r < 0.0) r += period;
  if (r <= top) return f_(r);
  return bc_sign(bc_) * f_(period - r);
}

Extension extend(const TransverseFunction& f, WallBc bc) { return Extension(f, bc); }

void project_paired_column(std::span<const double> below, std::span<const double> above, int n,
                           int rows_per_two, int m, WallBc bc, std::span<double> out_below,
                           std::span<double> out_above) {
  const int top = n * rows_per_two;
  const int period = 2 * top;
  const std::size_t rows = static_cast<std::size_t>(top + 1);
  if (below.size() != rows || above.size() != rows || out_below.size() != rows ||
      out_above.size() != rows)
    throw std::invalid_argument("project_paired_column: row count mismatch");
  const double sign = bc_sign(bc);
  const double scale = gamma(m, n) / (2.0 * n);
  std::vector<double> coeff(static_cast<std::size_t>(2 * n));
  for (int k = -n; k < n; ++k) coeff[static_cast<std::size_t>(k + n)] = coefficient(m, k, n);
  for (int j = 0; j <= top; ++j) {
    double lo = 0.0;
    double hi = 0.0;
    for (int k = -n; k < n; ++k) {
      const double c = coeff[static_cast<std::size_t>(k + n)];
      if (c == 0.0) continue;
      const int r = positive_mod(static_cast<long long>(j) + static_cast<long long>(k) * rows_per_two, period);
      double b;
      double t;
      if (r <= top) {
        b = below[static_cast<std::size_t>(r)];
        t = above[static_cast<std::size_t>(r)];
      } else {
        const auto q = static_cast<std::size_t>(period - r);
        b = sign * above[q];
        t = sign * below[q];
      }
      lo += c * b;
      hi += c * t;
    }
    out_below[static_cast<std::size_t>(j)] = scale * lo;
    out_above[static_cast<std::size_t>(j)] = scale * hi;
  }
}

TransverseFunction project(const TransverseFunction& f, int m, WallBc bc) {
  const int n = f.n();
  if (m < 0 || m > n) throw std::invalid_argument("project: need 0 <= m <= N");
  std::vector<double> vals(f.samples().begin(), f.samples().end());
  if (bc == WallBc::Dirichlet) {
    vals.front() = 0.0;
    vals.back() = 0.0;
  }
  std::vector<double> lo(vals.size());
  std::vector<double> hi(vals.size());
  project_paired_column(vals, vals, n, 2 * f.per_unit(), m, bc, lo, hi);
  for (std::size_t i = 0; i < lo.size(); ++i) lo[i] = 0.5 * (lo[i] + hi[i]);
  return TransverseFunction(n, f.per_unit(), std::move(lo));
}

GapLattice gap_lattice(Variant v) {
  return v == Variant::MidlineSegments ? GapLattice::Offset : GapLattice::Centered;
}

std::vector<double> project_gaps(GapLattice lattice, int n, std::span<const double> values, int m,
                                 WallBc bc) {
  if (m < 0 || m > n) throw std::invalid_argument("project_gaps: need 0 <= m <= N");
  const std::size_t count = lattice == GapLattice::Centered ? n + 1 : n;
  if (values.size() != count) throw std::invalid_argument("project_gaps: wrong number of gaps");
  if (lattice == GapLattice::Centered && bc == WallBc::Dirichlet &&
      (values.front() != 0.0 || values.back() != 0.0))
    throw std::invalid_argument(
        "project_gaps: Dirichlet boundary gaps straddle a reflection line and must be zero");
  const double sign = bc_sign(bc);
  const int period = 2 * n;
  auto folded = [&](int k) -> double {
    const int r = positive_mod(k, period);
    if (lattice == GapLattice::Centered) {
      if (r <= n) return values[static_cast<std::size_t>(r)];
      return sign * values[static_cast<std::size_t>(period - r)];
    }
    if (r <= n - 1) return values[static_cast<std::size_t>(r)];
    return sign * values[static_cast<std::size_t>(period - 1 - r)];
  };
  const double scale = gamma(m, n) / (2.0 * n);
  std::vector<double> out(count);
  for (std::size_t s = 0; s < count; ++s) {
    double acc = 0.0;
    for (int k = -n; k < n; ++k) acc += coefficient(m, k, n) * folded(static_cast<int>(s) + k);
    out[s] = scale * acc;
  }
  return out;
}

double inner_product(const TransverseFunction& f, const TransverseFunction& h) {
  if (f.size() != h.size()) throw std::invalid_argument("inner_product: grid mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = (i == 0 || i + 1 == f.size()) ? 0.5 : 1.0;
    acc += w * f[i] * h[i];
  }
  return acc * f.step();
}

DecompositionResiduals decomposition_residuals(const TransverseFunction& f,
                                               const TransverseFunction& h, WallBc bc) {
  const int n = f.n();
  DecompositionResiduals r;
  std::vector<TransverseFunction> fm;
  std::vector<TransverseFunction> hm;
  for (int m = 0; m <= n; ++m) {
    fm.push_back(project(f, m, bc));
    hm.push_back(project(h, m, bc));
  }
  // Interior nodes for Dirichlet: the odd extension pins the wall values to zero.
  const std::size_t first = bc == WallBc::Dirichlet ? 1 : 0;
  const std::size_t last = bc == WallBc::Dirichlet ? f.size() - 1 : f.size();
  for (std::size_t i = first; i < last; ++i) {
    double sum = 0.0;
    for (const auto& p : fm) sum += p[i];
    r.completeness = std::max(r.completeness, std::fabs(sum - f[i]));
  }
  for (int m = 0; m <= n; ++m) {
    for (int mp = 0; mp <= n; ++mp) {
      if (m == mp) continue;
      r.orthogonality =
          std::max(r.orthogonality, std::fabs(inner_product(fm[static_cast<std::size_t>(m)],
                                                            hm[static_cast<std::size_t>(mp)])));
    }
    const auto twice = project(fm[static_cast<std::size_t>(m)], m, bc);
    for (std::size_t i = 0; i < f.size(); ++i)
      r.idempotence =
          std::max(r.idempotence, std::fabs(twice[i] - fm[static_cast<std::size_t>(m)][i]));
    if (bc == WallBc::Dirichlet) {
      const auto& p = fm[static_cast<std::size_t>(m)];
      r.wall_trace = std::max({r.wall_trace, std::fabs(p[0]), std::fabs(p[p.size() - 1])});
    }
  }
  return r;
}

}  // namespace trapmodes
