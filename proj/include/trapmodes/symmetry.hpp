#pragma once

// Reflection extension of transverse functions and the projection onto the
// N + 1 mutually orthogonal symmetry classes S_0..S_N:
//
//   f_m(y) = gamma_m / (2N) * sum_{n=-N}^{N-1} cos(m n pi / N) f_ext(y + 2n).

#include <functional>
#include <span>
#include <vector>

#include "trapmodes/geometry.hpp"

namespace trapmodes {

struct SymmetryClass {
  int m;
  WallBc bc;
  int n;
};

/// cos(m n pi / N), evaluated on the reduced residue so that c(m, n) == c(m, -n)
/// exactly and the values at multiples of pi/2 are exact.
double coefficient(int m, int n, int big_n);

/// 2 / (1 + delta_{m0} + delta_{mN}).
double gamma(int m, int big_n);

/// Bottom of the essential spectrum of the Laplacian restricted to S_m.
double threshold(int m, int big_n, WallBc bc);
inline double threshold(const SymmetryClass& c) { return threshold(c.m, c.n, c.bc); }

/// Uniform samples of a function on [0, 2N] at per_unit * 2N + 1 nodes
/// (per_unit a power of two, so y -> y + 2 maps nodes onto nodes).
class TransverseFunction {
 public:
  TransverseFunction(int n, int per_unit, std::vector<double> samples);

  static TransverseFunction sample(int n, int per_unit, const std::function<double(double)>& f);

  int n() const { return n_; }
  int per_unit() const { return per_unit_; }
  double step() const { return 1.0 / per_unit_; }
  std::size_t size() const { return samples_.size(); }
  double node(std::size_t i) const { return static_cast<double>(i) * step(); }
  std::span<const double> samples() const { return samples_; }
  double operator[](std::size_t i) const { return samples_[i]; }

  /// Linear interpolation on [0, 2N].
  double operator()(double y) const;

 private:
  int n_;
  int per_unit_;
  std::vector<double> samples_;
};

/// 4N-periodic extension: even (Neumann) or odd (Dirichlet) about y = 0 and y = 2N.
class Extension {
 public:
  Extension(TransverseFunction f, WallBc bc) : f_(std::move(f)), bc_(bc) {}
  double operator()(double y) const;

 private:
  TransverseFunction f_;
  WallBc bc_;
};

Extension extend(const TransverseFunction& f, WallBc bc);

/// Node-exact projection onto S_m. For Dirichlet the extension is taken as
/// zero on the reflection lines y = 0 and y = 2N.
TransverseFunction project(const TransverseFunction& f, int m, WallBc bc);

/// Projection of a column whose rows carry one-sided values: below[j] and
/// above[j] are the limits from y < y_j and y > y_j (they differ on slit rows).
/// Reflection swaps the two sides. Rows are 0..n*rows_per_two, spacing 2/rows_per_two.
void project_paired_column(std::span<const double> below, std::span<const double> above, int n,
                           int rows_per_two, int m, WallBc bc, std::span<double> out_below,
                           std::span<double> out_above);

/// Gap arrangements. Centered: gaps centered on y = 2k (obstacles on odd
/// lines), indexed 0..N. Offset: gaps (2k, 2k+2) (segments on even lines),
/// indexed 0..N-1.
enum class GapLattice { Centered, Offset };

GapLattice gap_lattice(Variant v);

/// Projection of a function that is constant on each gap (the per-gap
/// representation used for indicators, free of grid artifacts). Returns the
/// per-gap constants of f_m. For Dirichlet on the centered lattice the two
/// boundary gaps straddle a reflection line and must carry zero.
std::vector<double> project_gaps(GapLattice lattice, int n, std::span<const double> values, int m,
                                 WallBc bc);

struct DecompositionResiduals {
  double completeness = 0.0;   ///< max_i |sum_m f_m - f| over nodes
  double orthogonality = 0.0;  ///< max_{m != m'} |<f_m, h_m'>|
  double idempotence = 0.0;    ///< max_m max_i |P_m f_m - f_m|
  double wall_trace = 0.0;     ///< Dirichlet: max |f_m| on y = 0, 2N
};

/// Trapezoid inner product on the node grid.
double inner_product(const TransverseFunction& f, const TransverseFunction& h);

DecompositionResiduals decomposition_residuals(const TransverseFunction& f,
                                               const TransverseFunction& h, WallBc bc);

}  // namespace trapmodes
