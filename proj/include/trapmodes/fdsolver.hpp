#pragma once

// Finite-volume discretization of the Laplacian on the truncated waveguide,
// symmetry-restricted eigenpairs and trapped-mode extraction.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <functional>
#include <string>
#include <vector>

#include "trapmodes/geometry.hpp"

namespace trapmodes {

/// Closure at x = ±L. Transparent uses the exact discrete exterior
/// (Dirichlet-to-Neumann map of the uniform strip), which makes the
/// eigenproblem nonlinear in mu.
enum class Truncation { Dirichlet, Neumann, Transparent };

std::string to_string(Truncation t);

struct GridSpec {
  double l = 8.0;
  double hx = 1.0 / 16.0;
  double hy = 1.0 / 16.0;
  Truncation truncation = Truncation::Transparent;
};

/// Throws GridMisaligned unless L/hx and a/hx are integers, the obstacle lines
/// fall on grid rows (1/hy integer for centered obstacles, 2/hy otherwise),
/// and L > a.
void check_grid(const WaveguideSpec& spec, const GridSpec& grid);

/// Same grid with both steps doubled; nullopt-like flag if it is misaligned.
bool coarsened(const WaveguideSpec& spec, const GridSpec& grid, GridSpec& out);

enum class NodeKind { Regular, Slit, Removed, Eliminated };

struct DiscreteOperator {
  int columns = 0;  ///< x nodes 0..columns-1 at x = x0 + i hx
  int rows = 0;     ///< y nodes 0..rows-1 at y = j hy
  double hx = 0.0;
  double hy = 0.0;
  double x0 = 0.0;
  int n = 1;
  WallBc wall_bc = WallBc::Neumann;
  Truncation truncation = Truncation::Dirichlet;

  Eigen::SparseMatrix<double> stiffness;  ///< without the exterior closure
  Eigen::VectorXd mass;                   ///< diagonal mass matrix

  std::vector<NodeKind> kind;  ///< per (i, j), index i * rows + j
  std::vector<int> lower;      ///< unknown carrying the y < y_j side (or -1)
  std::vector<int> upper;      ///< unknown carrying the y > y_j side (or -1)
  std::vector<double> cell;    ///< full (unsplit) cell mass per (i, j)

  // Exterior closure: kept rows of the end columns and the transverse modes.
  std::vector<int> left_nodes, right_nodes;
  Eigen::VectorXd boundary_weights;  ///< transverse mass M_y on the kept rows
  Eigen::MatrixXd weighted_modes;    ///< columns M_y e_k with e_k^T M_y e_k = 1
  Eigen::VectorXd mode_lambda;

  int size() const { return static_cast<int>(mass.size()); }
  double x(int i) const { return x0 + i * hx; }
  double y(int j) const { return j * hy; }
  int at(int i, int j) const { return i * rows + j; }

  /// Stiffness including the exterior closure at spectral parameter mu.
  Eigen::SparseMatrix<double> stiffness_at(double mu) const;
};

DiscreteOperator assemble(const WaveguideSpec& spec, const GridSpec& grid);

/// 1-D Laplacian on `cells` cells of width h with Neumann ends (sanity path).
DiscreteOperator laplacian_1d(int cells, double h);

/// Discrete transverse eigenvalue (2/hy²)(1 − cos(kπ hy/2N)) of the lowest
/// transverse mode belonging to class m.
double discrete_threshold(int m, int n, WallBc bc, double hy);

struct EigenPairs {
  std::vector<double> values;   ///< nondecreasing
  Eigen::MatrixXd vectors;      ///< M-orthonormal columns
  int iterations = 0;
  double max_residual = 0.0;
};

/// Applied in place to each block of iterates (e.g. a class projection).
using Filter = std::function<void(Eigen::MatrixXd&)>;

/// k smallest eigenpairs of K u = mu M u (M diagonal) by shift-invert block
/// subspace iteration with Rayleigh-Ritz. Residuals are measured in the
/// M^{-1} norm and must fall below tol * max(|mu|, 1e-2). Throws
/// ConvergenceFailure after max_iter sweeps.
EigenPairs lowest_eigenpairs(const Eigen::SparseMatrix<double>& k_mat, const Eigen::VectorXd& m_diag,
                             int k, double shift, const Filter& filter = {},
                             const Eigen::MatrixXd* start = nullptr, double tol = 1e-8,
                             int max_iter = 600);

/// Operator form; the exterior closure (if any) is frozen at `shift`.
EigenPairs lowest_eigenpairs(const DiscreteOperator& op, int k, double shift);

/// Column-wise projection of a grid vector onto class m (in place).
void project_class(const DiscreteOperator& op, int m, Eigen::Ref<Eigen::VectorXd> u);

struct Classification {
  int m = 0;
  double fraction = 0.0;
  std::vector<double> fractions;  ///< per class 0..N
};

/// Fractions ‖P_m u‖² / ‖u‖² in the mass norm; picks the largest.
Classification classify_mode(const DiscreteOperator& op, const Eigen::VectorXd& u);

/// Column norms ‖u(x_i, ·)‖ in the transverse mass norm.
std::vector<double> column_norms(const DiscreteOperator& op, const Eigen::VectorXd& u);

/// −slope of log column norm against |x| over a + 1 <= |x| <= L − 1.
double fit_decay_rate(const DiscreteOperator& op, const Eigen::VectorXd& u, double a, double l);

/// Lowest k eigenpairs within class m. For transparent truncation each is a
/// fixed point mu = eig_j(K(mu), M) searched below the discrete threshold;
/// fewer than k values are returned when no further fixed point exists.
EigenPairs class_eigenpairs(const DiscreteOperator& op, int m, int k, double shift);

struct ModeResult {
  double mu = 0.0;
  int m = 0;
  double class_energy_fraction = 0.0;
  double decay_rate = 0.0;
  GridSpec grid;
  double threshold = 0.0;
  double discrete_threshold = 0.0;
  double mu_coarse = 0.0;       ///< NaN when no coarse grid was run
  double error_estimate = 0.0;  ///< max(|mu − mu_coarse|, |threshold − discrete threshold|)
  int solved_class = 0;         ///< class the eigenproblem was restricted to
  int index = 0;                ///< position within that class
  bool retained = false;        ///< mu < threshold − 2 error and fraction >= 0.9
  Eigen::VectorXd vector;
};

struct SolveOutput {
  DiscreteOperator op;
  std::vector<ModeResult> modes;  ///< every candidate, ordered by (m, index)
  std::vector<ModeResult> retained() const;
};

/// Classes with positive threshold, k eigenpairs each, plus a rerun on the
/// coarsened grid for the error estimate when `with_coarse`.
SolveOutput trapped_modes(const WaveguideSpec& spec, const GridSpec& grid, int k = 2,
                          bool with_coarse = true);

struct ConvergenceRow {
  int m = 0;
  int index = 0;
  GridSpec grid;
  double mu = 0.0;
};

struct ConvergenceSummary {
  int m = 0;
  int index = 0;
  double mu_finest = 0.0;
  double richardson = 0.0;       ///< extrapolated value at the longest L
  double observed_order = 0.0;   ///< NaN with fewer than three step sizes
  double l_sensitivity = 0.0;    ///< |mu(L_max) − mu(L_min)| at the finest step
  double decay_bound = 0.0;      ///< exp(−2 κ (L_min − a)), κ = sqrt(threshold − mu)
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceSummary> summary;
};

/// Needs at least two step sizes (halving) at one L and at least two L values.
ConvergenceTable convergence_study(const WaveguideSpec& spec, const std::vector<GridSpec>& grids,
                                   int k = 2);

}  // namespace trapmodes
