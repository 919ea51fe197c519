#include "trapmodes/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "trapmodes/errors.hpp"

namespace trapmodes {

std::string to_string(WallBc bc) { return bc == WallBc::Neumann ? "Neumann" : "Dirichlet"; }

std::string to_string(Variant v) {
  switch (v) {
    case Variant::CenteredObstacles:
      return "CenteredObstacles";
    case Variant::MidlineSegments:
      return "MidlineSegments";
    case Variant::Open:
      return "Open";
  }
  return "?";
}

GapProfile GapProfile::zero() { return GapProfile{}; }

GapProfile GapProfile::parabolic(double amplitude) {
  GapProfile p;
  p.kind_ = Kind::Parabolic;
  p.amplitude_ = amplitude;
  return p;
}

GapProfile GapProfile::cosine(double amplitude) {
  GapProfile p;
  p.kind_ = Kind::Cosine;
  p.amplitude_ = amplitude;
  return p;
}

GapProfile GapProfile::samples(std::vector<double> values) {
  if (values.size() < 2) throw SpecError("sampled profile needs at least two values");
  GapProfile p;
  p.kind_ = Kind::Samples;
  p.values_ = std::move(values);
  return p;
}

bool GapProfile::is_zero() const {
  switch (kind_) {
    case Kind::Zero:
      return true;
    case Kind::Parabolic:
    case Kind::Cosine:
      return amplitude_ == 0.0;
    case Kind::Samples:
      for (double v : values_)
        if (v != 0.0) return false;
      return true;
  }
  return false;
}

double GapProfile::operator()(double x, double a) const {
  if (std::fabs(x) > a) return 0.0;
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Parabolic: {
      const double s = x / a;
      return amplitude_ * (1.0 - s * s);
    }
    case Kind::Cosine: {
      const double c = std::cos(0.5 * std::numbers::pi * x / a);
      return amplitude_ * c * c;
    }
    case Kind::Samples: {
      const auto intervals = static_cast<double>(values_.size() - 1);
      const double t = (x + a) / (2.0 * a) * intervals;
      auto i = static_cast<std::size_t>(std::floor(t));
      if (i >= values_.size() - 1) i = values_.size() - 2;
      const double w = t - static_cast<double>(i);
      return (1.0 - w) * values_[i] + w * values_[i + 1];
    }
  }
  return 0.0;
}

std::vector<double> GapProfile::breakpoints(double a) const {
  std::vector<double> out;
  if (kind_ != Kind::Samples) return out;
  const auto intervals = values_.size() - 1;
  for (std::size_t i = 1; i < intervals; ++i)
    out.push_back(-a + 2.0 * a * static_cast<double>(i) / static_cast<double>(intervals));
  return out;
}

std::string GapProfile::label() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Zero:
      return "zero";
    case Kind::Parabolic:
      os << "parabolic:" << amplitude_;
      return os.str();
    case Kind::Cosine:
      os << "cosine:" << amplitude_;
      return os.str();
    case Kind::Samples:
      os << "samples:" << values_.size();
      return os.str();
  }
  return "?";
}

WaveguideSpec::WaveguideSpec(int n, double a, GapProfile profile, WallBc wall_bc, Variant variant)
    : n_(n), a_(a), profile_(std::move(profile)), wall_bc_(wall_bc), variant_(variant) {
  if (n_ < 1) throw SpecError("n must be >= 1");
  if (!(a_ > 0.0) || !std::isfinite(a_)) throw SpecError("a must be a positive finite number");
  if (profile_.kind() == GapProfile::Kind::Parabolic || profile_.kind() == GapProfile::Kind::Cosine) {
    if (!(profile_.amplitude() >= 0.0 && profile_.amplitude() < 1.0))
      throw SpecError("profile amplitude must lie in [0, 1)");
  }
  if (profile_.kind() == GapProfile::Kind::Samples) {
    const auto& v = profile_.values();
    if (std::fabs(v.front()) > 1e-12 || std::fabs(v.back()) > 1e-12)
      throw SpecError("sampled profile must vanish at x = -a and x = a");
  }
  constexpr int dense = 4097;
  for (int i = 0; i < dense; ++i) {
    const double x = -a_ + 2.0 * a_ * i / (dense - 1);
    const double gx = profile_(x, a_);
    if (!(gx >= 0.0 && gx < 1.0)) throw SpecError("profile must satisfy 0 <= g(x) < 1 on [-a, a]");
  }
  if (variant_ == Variant::MidlineSegments) {
    if (!profile_.is_zero()) throw SpecError("MidlineSegments requires the zero profile");
    if (wall_bc_ != WallBc::Neumann) throw SpecError("MidlineSegments requires Neumann walls");
    if (n_ < 2) throw SpecError("MidlineSegments requires n >= 2");
  }
  if (variant_ == Variant::Open && !profile_.is_zero())
    throw SpecError("an open strip has no obstacle profile");
}

double WaveguideSpec::g(double x) const {
  if (variant_ != Variant::CenteredObstacles) return 0.0;
  return profile_(x, a_);
}

std::vector<Interval> gap_intervals(const WaveguideSpec& spec, double x) {
  const int n = spec.n();
  const double top = spec.height();
  std::vector<Interval> out;
  if (std::fabs(x) > spec.a() || spec.variant() == Variant::Open) {
    out.push_back({0.0, top});
    return out;
  }
  if (spec.variant() == Variant::MidlineSegments) {
    for (int s = 0; s < n; ++s) out.push_back({2.0 * s, 2.0 * s + 2.0});
    return out;
  }
  const double gx = spec.g(x);
  out.push_back({0.0, 1.0 - gx});
  for (int j = 1; j < n; ++j) out.push_back({2.0 * j - 1.0 + gx, 2.0 * j + 1.0 - gx});
  out.push_back({2.0 * n - 1.0 + gx, top});
  return out;
}

bool in_domain(const WaveguideSpec& spec, double x, double y) {
  if (!(y > 0.0 && y < spec.height())) return false;
  for (const auto& iv : gap_intervals(spec, x))
    if (iv.contains(y)) return true;
  return false;
}

}  // namespace trapmodes
