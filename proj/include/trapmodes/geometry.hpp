#pragma once

// Obstructed planar strip 0 < y < 2N with N congruent obstacles centered on
// y = 2m - 1 (half-thickness g(x) for |x| <= a), or N - 1 zero-thickness
// segments on y = 2, 4, ..., 2N - 2.

#include <string>
#include <vector>

namespace trapmodes {

enum class WallBc { Neumann, Dirichlet };

enum class Variant {
  CenteredObstacles,
  MidlineSegments,
  /// Unobstructed strip; reference configuration for the eigensolver.
  Open,
};

std::string to_string(WallBc bc);
std::string to_string(Variant v);

/// Gap profile g on [-a, a].
class GapProfile {
 public:
  enum class Kind { Zero, Parabolic, Cosine, Samples };

  static GapProfile zero();
  /// amplitude * (1 - (x/a)^2)
  static GapProfile parabolic(double amplitude);
  /// amplitude * cos^2(pi x / 2a)
  static GapProfile cosine(double amplitude);
  /// Values at uniform nodes on [-a, a], linearly interpolated.
  static GapProfile samples(std::vector<double> values);

  Kind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  const std::vector<double>& values() const { return values_; }
  bool is_zero() const;

  double operator()(double x, double a) const;

  /// Interior kinks of the profile (sample nodes), strictly inside (-a, a).
  std::vector<double> breakpoints(double a) const;

  /// Short label: "zero", "parabolic:0.5", "cosine:0.3", "samples:257".
  std::string label() const;

 private:
  Kind kind_ = Kind::Zero;
  double amplitude_ = 0.0;
  std::vector<double> values_;
};

struct Interval {
  double lo;
  double hi;
  double length() const { return hi - lo; }
  bool contains(double y) const { return y > lo && y < hi; }
};

/// Geometry plus boundary-condition family. Immutable once validated.
class WaveguideSpec {
 public:
  WaveguideSpec(int n, double a, GapProfile profile, WallBc wall_bc,
                Variant variant = Variant::CenteredObstacles);

  int n() const { return n_; }
  double a() const { return a_; }
  const GapProfile& profile() const { return profile_; }
  WallBc wall_bc() const { return wall_bc_; }
  Variant variant() const { return variant_; }
  double height() const { return 2.0 * n_; }

  /// Obstacle half-thickness at x; zero outside |x| <= a.
  double g(double x) const;

  std::vector<double> profile_breakpoints() const { return profile_.breakpoints(a_); }

 private:
  int n_;
  double a_;
  GapProfile profile_;
  WallBc wall_bc_;
  Variant variant_;
};

/// Ordered open y-intervals of the free region on the vertical line at x.
/// CenteredObstacles, |x| <= a: I_0..I_N = (0, 1-g), (1+g, 3-g), ..., (2N-1+g, 2N).
/// MidlineSegments, |x| <= a: (0,2), (2,4), ..., (2N-2, 2N).
/// Otherwise the single interval (0, 2N).
std::vector<Interval> gap_intervals(const WaveguideSpec& spec, double x);

/// True iff (x, y) lies in the open free region.
bool in_domain(const WaveguideSpec& spec, double x, double y);

}  // namespace trapmodes
