#include "trapmodes/fdsolver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "trapmodes/errors.hpp"
#include "trapmodes/symmetry.hpp"

namespace trapmodes {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool near_integer(double v) { return std::fabs(v - std::round(v)) <= 1e-9 * std::max(1.0, std::fabs(v)); }

int as_int(double v) { return static_cast<int>(std::lround(v)); }

using Triplets = std::vector<Eigen::Triplet<double>>;

// Unknown index on one side of a node; -1 for a Dirichlet zero, -2 for a
// removed node (no coupling).
constexpr int kZero = -1;
constexpr int kNone = -2;

void add_edge(Triplets& t, int p, int q, double w) {
  if (p == kNone || q == kNone) return;
  if (p < 0 && q < 0) return;
  if (p < 0) {
    t.emplace_back(q, q, w);
    return;
  }
  if (q < 0) {
    t.emplace_back(p, p, w);
    return;
  }
  t.emplace_back(p, p, w);
  t.emplace_back(q, q, w);
  t.emplace_back(p, q, -w);
  t.emplace_back(q, p, -w);
}

int transverse_index(int m, int n, WallBc bc) {
  const int period = 2 * n;
  for (int k = bc == WallBc::Neumann ? 0 : 1;; ++k) {
    const int r = k % period;
    if (r == m || r == (period - m) % period) return k;
  }
}

double random_entry(std::mt19937& gen) { return static_cast<double>(gen()) * 2.3283064365386963e-10 - 0.5; }

void normalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index best = 0;
  double mag = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::fabs(v[i]);
    if (a > mag * (1.0 + 1e-9)) {
      mag = a;
      best = i;
    }
  }
  if (v.size() > 0 && v[best] < 0.0) v = -v;
}

class ShiftedSolver {
 public:
  explicit ShiftedSolver(const Eigen::SparseMatrix<double>& a) {
    ldlt_.compute(a);
    use_lu_ = ldlt_.info() != Eigen::Success || !(ldlt_.vectorD().array().abs() > 0.0).all();
    if (use_lu_) {
      lu_.analyzePattern(a);
      lu_.factorize(a);
      if (lu_.info() != Eigen::Success)
        throw ConvergenceFailure("shift-invert factorization failed (shift is an eigenvalue?)");
    }
  }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const {
    return use_lu_ ? Eigen::MatrixXd(lu_.solve(b)) : Eigen::MatrixXd(ldlt_.solve(b));
  }

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool use_lu_ = false;
};

// M-orthonormalizes the columns in place (twice-applied modified
// Gram-Schmidt); dependent columns are replaced by fresh filtered vectors.
void m_orthonormalize(Eigen::MatrixXd& v, const Eigen::VectorXd& m_diag, const Filter& filter,
                      std::mt19937& gen) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    for (int attempt = 0; attempt < 5; ++attempt) {
      const double before = std::sqrt(v.col(c).dot(m_diag.cwiseProduct(v.col(c))));
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index q = 0; q < c; ++q)
          v.col(c) -= v.col(q).dot(m_diag.cwiseProduct(v.col(c))) * v.col(q);
      const double after = std::sqrt(v.col(c).dot(m_diag.cwiseProduct(v.col(c))));
      if (after > 1e-10 * before && after > 0.0) {
        v.col(c) /= after;
        break;
      }
      Eigen::MatrixXd fresh(v.rows(), 1);
      for (Eigen::Index i = 0; i < v.rows(); ++i) fresh(i, 0) = random_entry(gen);
      if (filter) filter(fresh);
      v.col(c) = fresh.col(0);
      if (attempt == 4) throw ConvergenceFailure("could not complete an M-orthonormal basis");
    }
  }
}

}  // namespace

std::string to_string(Truncation t) {
  switch (t) {
    case Truncation::Dirichlet: return "Dirichlet";
    case Truncation::Neumann: return "Neumann";
    case Truncation::Transparent: return "Transparent";
  }
  return "?";
}

void check_grid(const WaveguideSpec& spec, const GridSpec& grid) {
  std::ostringstream os;
  if (!(grid.hx > 0.0) || !(grid.hy > 0.0) || !(grid.l > 0.0) || !std::isfinite(grid.hx) ||
      !std::isfinite(grid.hy) || !std::isfinite(grid.l))
    throw GridMisaligned("grid steps and L must be positive and finite");
  if (!(grid.l > spec.a())) throw GridMisaligned("truncation L must exceed the obstacle half-length a");
  if (!near_integer(grid.l / grid.hx)) {
    os << "L/hx = " << grid.l / grid.hx << " is not an integer";
    throw GridMisaligned(os.str());
  }
  if (!near_integer(spec.a() / grid.hx)) {
    os << "a/hx = " << spec.a() / grid.hx << " is not an integer";
    throw GridMisaligned(os.str());
  }
  if (!near_integer(2.0 / grid.hy)) {
    os << "2/hy = " << 2.0 / grid.hy << " is not an integer";
    throw GridMisaligned(os.str());
  }
  if (spec.variant() == Variant::CenteredObstacles && !near_integer(1.0 / grid.hy)) {
    os << "1/hy = " << 1.0 / grid.hy << " is not an integer (obstacles sit on odd lines)";
    throw GridMisaligned(os.str());
  }
}

bool coarsened(const WaveguideSpec& spec, const GridSpec& grid, GridSpec& out) {
  out = grid;
  out.hx = 2.0 * grid.hx;
  out.hy = 2.0 * grid.hy;
  try {
    check_grid(spec, out);
  } catch (const GridMisaligned&) {
    return false;
  }
  return true;
}

DiscreteOperator assemble(const WaveguideSpec& spec, const GridSpec& grid) {
  check_grid(spec, grid);
  DiscreteOperator op;
  const int half = as_int(grid.l / grid.hx);
  const int ia = as_int(spec.a() / grid.hx);
  op.columns = 2 * half + 1;
  op.rows = as_int(spec.height() / grid.hy) + 1;
  op.hx = grid.hx;
  op.hy = grid.hy;
  op.x0 = -grid.l;
  op.n = spec.n();
  op.wall_bc = spec.wall_bc();
  op.truncation = grid.truncation;
  const int cols = op.columns;
  const int rows = op.rows;
  const bool dir_walls = spec.wall_bc() == WallBc::Dirichlet;

  std::vector<int> obstacle_rows;
  if (spec.variant() == Variant::CenteredObstacles)
    for (int k = 1; k <= spec.n(); ++k) obstacle_rows.push_back(as_int((2.0 * k - 1.0) / grid.hy));
  else if (spec.variant() == Variant::MidlineSegments)
    for (int k = 1; k < spec.n(); ++k) obstacle_rows.push_back(as_int(2.0 * k / grid.hy));

  op.kind.assign(static_cast<std::size_t>(cols * rows), NodeKind::Regular);
  for (int i = 0; i < cols; ++i) {
    const bool end = i == 0 || i == cols - 1;
    for (int j = 0; j < rows; ++j) {
      const bool wall = j == 0 || j == rows - 1;
      if ((wall && dir_walls) || (end && grid.truncation == Truncation::Dirichlet))
        op.kind[op.at(i, j)] = NodeKind::Eliminated;
    }
    if (std::abs(i - half) > ia) continue;
    const double g = spec.g(op.x(i));
    for (int jc : obstacle_rows) {
      if (g < 0.5 * grid.hy) {
        op.kind[op.at(i, jc)] = NodeKind::Slit;
        continue;
      }
      for (int j = 0; j < rows; ++j)
        if (std::abs(j - jc) * grid.hy < g) op.kind[op.at(i, j)] = NodeKind::Removed;
    }
  }

  auto cx = [&](int i) {
    const bool end = i == 0 || i == cols - 1;
    return end && grid.truncation == Truncation::Neumann ? 0.5 * grid.hx : grid.hx;
  };
  auto cy = [&](int j) {
    const bool wall = j == 0 || j == rows - 1;
    return wall && !dir_walls ? 0.5 * grid.hy : grid.hy;
  };

  op.lower.assign(op.kind.size(), -1);
  op.upper.assign(op.kind.size(), -1);
  op.cell.assign(op.kind.size(), 0.0);
  std::vector<double> mass;
  for (int i = 0; i < cols; ++i)
    for (int j = 0; j < rows; ++j) {
      const int id = op.at(i, j);
      op.cell[id] = cx(i) * cy(j);
      switch (op.kind[id]) {
        case NodeKind::Regular:
          op.lower[id] = op.upper[id] = static_cast<int>(mass.size());
          mass.push_back(cx(i) * cy(j));
          break;
        case NodeKind::Slit:
          op.lower[id] = static_cast<int>(mass.size());
          mass.push_back(0.5 * cx(i) * grid.hy);
          op.upper[id] = static_cast<int>(mass.size());
          mass.push_back(0.5 * cx(i) * grid.hy);
          break;
        default: break;
      }
    }
  op.mass = Eigen::Map<Eigen::VectorXd>(mass.data(), static_cast<Eigen::Index>(mass.size()));

  auto side = [&](int i, int j, bool up) {
    const int id = op.at(i, j);
    switch (op.kind[id]) {
      case NodeKind::Removed: return kNone;
      case NodeKind::Eliminated: return kZero;
      default: return up ? op.upper[id] : op.lower[id];
    }
  };

  Triplets t;
  for (int i = 0; i < cols; ++i)
    for (int j = 0; j + 1 < rows; ++j) add_edge(t, side(i, j, true), side(i, j + 1, false), cx(i) / grid.hy);
  for (int i = 0; i + 1 < cols; ++i)
    for (int j = 0; j < rows; ++j) {
      const bool split = op.kind[op.at(i, j)] == NodeKind::Slit || op.kind[op.at(i + 1, j)] == NodeKind::Slit;
      if (split) {
        add_edge(t, side(i, j, false), side(i + 1, j, false), 0.5 * grid.hy / grid.hx);
        add_edge(t, side(i, j, true), side(i + 1, j, true), 0.5 * grid.hy / grid.hx);
      } else {
        add_edge(t, side(i, j, false), side(i + 1, j, false), cy(j) / grid.hx);
      }
    }
  // tip cells: lower-upper edge through the uncovered half cell
  for (int i : {half - ia, half + ia})
    for (int j = 0; j < rows; ++j)
      if (op.kind[op.at(i, j)] == NodeKind::Slit)
        add_edge(t, op.lower[op.at(i, j)], op.upper[op.at(i, j)], grid.hx / grid.hy);

  op.stiffness.resize(op.size(), op.size());
  op.stiffness.setFromTriplets(t.begin(), t.end());

  if (grid.truncation == Truncation::Transparent) {
    const int ny = rows - 1;
    std::vector<int> kept;
    for (int j = 0; j < rows; ++j)
      if (!(dir_walls && (j == 0 || j == rows - 1))) kept.push_back(j);
    for (int j : kept) {
      op.left_nodes.push_back(op.lower[op.at(0, j)]);
      op.right_nodes.push_back(op.lower[op.at(cols - 1, j)]);
    }
    const int k_lo = dir_walls ? 1 : 0;
    const int k_hi = dir_walls ? ny - 1 : ny;
    const auto nk = static_cast<Eigen::Index>(k_hi - k_lo + 1);
    const auto nr = static_cast<Eigen::Index>(kept.size());
    op.boundary_weights.resize(nr);
    for (Eigen::Index r = 0; r < nr; ++r) op.boundary_weights[r] = cy(kept[static_cast<std::size_t>(r)]);
    op.weighted_modes.resize(nr, nk);
    op.mode_lambda.resize(nk);
    for (int k = k_lo; k <= k_hi; ++k) {
      const Eigen::Index c = k - k_lo;
      Eigen::VectorXd e(nr);
      for (Eigen::Index r = 0; r < nr; ++r) {
        const double arg = std::numbers::pi * k * kept[static_cast<std::size_t>(r)] / ny;
        e[r] = dir_walls ? std::sin(arg) : std::cos(arg);
      }
      e /= std::sqrt(e.dot(op.boundary_weights.cwiseProduct(e)));
      op.weighted_modes.col(c) = op.boundary_weights.cwiseProduct(e);
      op.mode_lambda[c] = 2.0 / (grid.hy * grid.hy) * (1.0 - std::cos(std::numbers::pi * k / ny));
    }
  }
  return op;
}

Eigen::SparseMatrix<double> DiscreteOperator::stiffness_at(double mu) const {
  if (truncation != Truncation::Transparent) return stiffness;
  Eigen::VectorXd r(mode_lambda.size());
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    const double t = 1.0 + 0.5 * hx * hx * (mode_lambda[k] - mu);
    r[k] = t > 1.0 ? 1.0 / (t + std::sqrt(t * t - 1.0)) : 0.0;
  }
  Eigen::MatrixXd block = -weighted_modes * r.asDiagonal() * weighted_modes.transpose();
  block = 0.5 * (block + block.transpose()).eval();
  block.diagonal() += boundary_weights;
  block /= hx;
  Triplets t;
  for (const auto* nodes : {&left_nodes, &right_nodes})
    for (std::size_t p = 0; p < nodes->size(); ++p)
      for (std::size_t q = 0; q < nodes->size(); ++q)
        t.emplace_back((*nodes)[p], (*nodes)[q], block(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)));
  Eigen::SparseMatrix<double> closure(size(), size());
  closure.setFromTriplets(t.begin(), t.end());
  return stiffness + closure;
}

DiscreteOperator laplacian_1d(int cells, double h) {
  if (cells < 1 || !(h > 0.0)) throw SpecError("laplacian_1d needs cells >= 1 and h > 0");
  DiscreteOperator op;
  op.columns = cells + 1;
  op.rows = 1;
  op.hx = h;
  op.hy = 1.0;
  op.truncation = Truncation::Neumann;
  op.kind.assign(static_cast<std::size_t>(cells + 1), NodeKind::Regular);
  op.lower.resize(op.kind.size());
  op.upper.resize(op.kind.size());
  op.cell.resize(op.kind.size());
  op.mass.resize(cells + 1);
  for (int i = 0; i <= cells; ++i) {
    op.lower[i] = op.upper[i] = i;
    op.mass[i] = op.cell[i] = (i == 0 || i == cells) ? 0.5 * h : h;
  }
  Triplets t;
  for (int i = 0; i < cells; ++i) add_edge(t, i, i + 1, 1.0 / h);
  op.stiffness.resize(cells + 1, cells + 1);
  op.stiffness.setFromTriplets(t.begin(), t.end());
  return op;
}

double discrete_threshold(int m, int n, WallBc bc, double hy) {
  const int k = transverse_index(m, n, bc);
  return 2.0 / (hy * hy) * (1.0 - std::cos(k * std::numbers::pi * hy / (2.0 * n)));
}

EigenPairs lowest_eigenpairs(const Eigen::SparseMatrix<double>& k_mat, const Eigen::VectorXd& m_diag,
                             int k, double shift, const Filter& filter, const Eigen::MatrixXd* start,
                             double tol, int max_iter) {
  const Eigen::Index n = k_mat.rows();
  if (k < 1) throw SpecError("lowest_eigenpairs needs k >= 1");
  if (n == 0) throw SpecError("lowest_eigenpairs on an empty operator");
  const Eigen::Index want = std::min<Eigen::Index>(k, n);
  const Eigen::Index block = std::min<Eigen::Index>(want + 4, n);

  Eigen::SparseMatrix<double> shifted = k_mat;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= shift * m_diag[i];
  shifted.makeCompressed();
  const ShiftedSolver solver(shifted);

  std::mt19937 gen(20240531u);
  Eigen::MatrixXd v(n, block);
  for (Eigen::Index c = 0; c < block; ++c)
    for (Eigen::Index i = 0; i < n; ++i) v(i, c) = random_entry(gen);
  if (start)
    for (Eigen::Index c = 0; c < std::min(block, start->cols()); ++c)
      if (start->rows() == n) v.col(c) = start->col(c);
  if (filter) filter(v);
  m_orthonormalize(v, m_diag, filter, gen);

  EigenPairs out;
  Eigen::VectorXd theta;
  Eigen::VectorXd res(want);
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::MatrixXd w = solver.solve(m_diag.asDiagonal() * v);
    if (filter) filter(w);
    m_orthonormalize(w, m_diag, filter, gen);
    Eigen::MatrixXd h = w.transpose() * (k_mat * w);
    h = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    theta = es.eigenvalues();
    v = w * es.eigenvectors();
    const Eigen::MatrixXd r = k_mat * v.leftCols(want) - m_diag.asDiagonal() * v.leftCols(want) * theta.head(want).asDiagonal();
    bool ok = true;
    for (Eigen::Index c = 0; c < want; ++c) {
      res[c] = std::sqrt((r.col(c).array().square() / m_diag.array()).sum());
      if (!(res[c] <= tol * std::max(std::fabs(theta[c]), 1e-2))) ok = false;
    }
    out.iterations = it;
    if (ok) break;
    if (it == max_iter) {
      std::ostringstream os;
      os << "subspace iteration did not converge in " << max_iter << " sweeps (shift " << shift
         << ", residuals " << res.transpose() << ", Ritz values " << theta.head(want).transpose() << ")";
      throw ConvergenceFailure(os.str());
    }
  }
  out.vectors = v.leftCols(want);
  for (Eigen::Index c = 0; c < want; ++c) {
    normalize_sign(out.vectors.col(c));
    out.values.push_back(theta[c]);
  }
  out.max_residual = res.maxCoeff();
  return out;
}

EigenPairs lowest_eigenpairs(const DiscreteOperator& op, int k, double shift) {
  return lowest_eigenpairs(op.stiffness_at(shift), op.mass, k, shift);
}

void project_class(const DiscreteOperator& op, int m, Eigen::Ref<Eigen::VectorXd> u) {
  const int rows = op.rows;
  const int per_two = as_int(2.0 / op.hy);
  std::vector<double> below(rows), above(rows), pb(rows), pa(rows);
  for (int i = 0; i < op.columns; ++i) {
    for (int j = 0; j < rows; ++j) {
      const int id = op.at(i, j);
      const bool live = op.kind[id] == NodeKind::Regular || op.kind[id] == NodeKind::Slit;
      below[j] = live ? u[op.lower[id]] : 0.0;
      above[j] = live ? u[op.upper[id]] : 0.0;
    }
    project_paired_column(below, above, op.n, per_two, m, op.wall_bc, pb, pa);
    for (int j = 0; j < rows; ++j) {
      const int id = op.at(i, j);
      if (op.kind[id] == NodeKind::Regular) {
        u[op.lower[id]] = 0.5 * (pb[j] + pa[j]);
      } else if (op.kind[id] == NodeKind::Slit) {
        u[op.lower[id]] = pb[j];
        u[op.upper[id]] = pa[j];
      }
    }
  }
}

Classification classify_mode(const DiscreteOperator& op, const Eigen::VectorXd& u) {
  Classification c;
  const double total = u.dot(op.mass.cwiseProduct(u));
  for (int m = 0; m <= op.n; ++m) {
    Eigen::VectorXd p = u;
    project_class(op, m, p);
    const double f = total > 0.0 ? p.dot(op.mass.cwiseProduct(p)) / total : 0.0;
    c.fractions.push_back(f);
    if (f > c.fraction) {
      c.fraction = f;
      c.m = m;
    }
  }
  return c;
}

std::vector<double> column_norms(const DiscreteOperator& op, const Eigen::VectorXd& u) {
  std::vector<double> out(static_cast<std::size_t>(op.columns), 0.0);
  for (int i = 0; i < op.columns; ++i) {
    double s = 0.0;
    for (int j = 0; j < op.rows; ++j) {
      const int id = op.at(i, j);
      if (op.kind[id] == NodeKind::Regular) {
        s += op.mass[op.lower[id]] * u[op.lower[id]] * u[op.lower[id]];
      } else if (op.kind[id] == NodeKind::Slit) {
        s += op.mass[op.lower[id]] * u[op.lower[id]] * u[op.lower[id]];
        s += op.mass[op.upper[id]] * u[op.upper[id]] * u[op.upper[id]];
      }
    }
    out[static_cast<std::size_t>(i)] = std::sqrt(s / op.hx);
  }
  return out;
}

double fit_decay_rate(const DiscreteOperator& op, const Eigen::VectorXd& u, double a, double l) {
  const auto norms = column_norms(op, u);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (int i = 0; i < op.columns; ++i) {
    const double ax = std::fabs(op.x(i));
    const double nv = norms[static_cast<std::size_t>(i)];
    if (ax < a + 1.0 - 1e-9 || ax > l - 1.0 + 1e-9 || !(nv > 0.0)) continue;
    const double ly = std::log(nv);
    sx += ax;
    sy += ly;
    sxx += ax * ax;
    sxy += ax * ly;
    ++count;
  }
  if (count < 2) return kNaN;
  const double den = count * sxx - sx * sx;
  if (!(std::fabs(den) > 0.0)) return kNaN;
  return -(count * sxy - sx * sy) / den;
}

EigenPairs class_eigenpairs(const DiscreteOperator& op, int m, int k, double shift) {
  const Filter filter = [&op, m](Eigen::MatrixXd& block) {
    for (Eigen::Index c = 0; c < block.cols(); ++c) project_class(op, m, block.col(c));
  };
  if (op.truncation != Truncation::Transparent)
    return lowest_eigenpairs(op.stiffness, op.mass, k, shift, filter);

  const double top = discrete_threshold(m, op.n, op.wall_bc, op.hy);
  const double mu0 = top - 1e-9 * std::max(1.0, top);
  Eigen::MatrixXd warm;
  auto solve_at = [&](double mu) {
    EigenPairs pr = lowest_eigenpairs(op.stiffness_at(mu), op.mass, k, shift, filter,
                                      warm.size() ? &warm : nullptr);
    warm = pr.vectors;
    return pr;
  };
  const EigenPairs first = solve_at(mu0);
  EigenPairs out;
  out.iterations = first.iterations;
  std::vector<Eigen::VectorXd> vecs;
  for (int j = 0; j < static_cast<int>(first.values.size()); ++j) {
    if (!(first.values[static_cast<std::size_t>(j)] < mu0)) break;
    warm = first.vectors;
    double cur = first.values[static_cast<std::size_t>(j)];
    EigenPairs pr = first;
    bool settled = false;
    for (int it = 0; it < 100; ++it) {
      pr = solve_at(cur);
      out.iterations += pr.iterations;
      const double next = pr.values[static_cast<std::size_t>(j)];
      const bool done = std::fabs(next - cur) <= 1e-12 * std::max(1.0, std::fabs(cur));
      cur = next;
      if (done) {
        settled = true;
        break;
      }
    }
    if (!settled) {
      std::ostringstream os;
      os << "exterior closure fixed point did not settle for class " << m << ", index " << j;
      throw ConvergenceFailure(os.str());
    }
    out.values.push_back(cur);
    vecs.push_back(pr.vectors.col(j));
    out.max_residual = std::max(out.max_residual, pr.max_residual);
  }
  out.vectors.resize(op.size(), static_cast<Eigen::Index>(vecs.size()));
  for (std::size_t c = 0; c < vecs.size(); ++c) out.vectors.col(static_cast<Eigen::Index>(c)) = vecs[c];
  return out;
}

std::vector<ModeResult> SolveOutput::retained() const {
  std::vector<ModeResult> out;
  for (const auto& m : modes)
    if (m.retained) out.push_back(m);
  return out;
}

SolveOutput trapped_modes(const WaveguideSpec& spec, const GridSpec& grid, int k, bool with_coarse) {
  if (k < 1) throw SpecError("k must be at least 1");
  SolveOutput out;
  out.op = assemble(spec, grid);
  GridSpec coarse_grid;
  const bool have_coarse = with_coarse && coarsened(spec, grid, coarse_grid);
  DiscreteOperator coarse_op;
  if (have_coarse) coarse_op = assemble(spec, coarse_grid);

  for (int m = 0; m <= spec.n(); ++m) {
    const double thr = threshold(m, spec.n(), spec.wall_bc());
    if (!(thr > 0.0)) continue;
    const double thr_h = discrete_threshold(m, spec.n(), spec.wall_bc(), grid.hy);
    const double shift = 0.5 * thr;
    const EigenPairs fine = class_eigenpairs(out.op, m, k, shift);
    EigenPairs rough;
    if (have_coarse) rough = class_eigenpairs(coarse_op, m, k, shift);
    for (std::size_t j = 0; j < fine.values.size(); ++j) {
      ModeResult r;
      r.mu = fine.values[j];
      r.vector = fine.vectors.col(static_cast<Eigen::Index>(j));
      const Classification cl = classify_mode(out.op, r.vector);
      r.m = cl.m;
      r.class_energy_fraction = cl.fraction;
      r.decay_rate = fit_decay_rate(out.op, r.vector, spec.a(), grid.l);
      r.grid = grid;
      r.threshold = thr;
      r.discrete_threshold = thr_h;
      r.solved_class = m;
      r.index = static_cast<int>(j);
      r.mu_coarse = j < rough.values.size() ? rough.values[j] : kNaN;
      r.error_estimate = std::fabs(thr - thr_h);
      if (have_coarse)
        r.error_estimate = std::isnan(r.mu_coarse) ? std::numeric_limits<double>::infinity()
                                                   : std::max(r.error_estimate, std::fabs(r.mu - r.mu_coarse));
      r.retained = cl.m == m && cl.fraction >= 0.9 && r.mu < thr - 2.0 * r.error_estimate;
      out.modes.push_back(std::move(r));
    }
  }
  return out;
}

ConvergenceTable convergence_study(const WaveguideSpec& spec, const std::vector<GridSpec>& grids, int k) {
  std::map<double, std::vector<double>> steps_at_l;
  for (const auto& g : grids) steps_at_l[g.l].push_back(g.hx);
  bool refined = false;
  for (const auto& [l, hs] : steps_at_l) refined = refined || hs.size() >= 2;
  if (steps_at_l.size() < 2 || !refined)
    throw SpecError("convergence study needs two step sizes at one L and at least two L values");

  ConvergenceTable table;
  for (const auto& g : grids) {
    const DiscreteOperator op = assemble(spec, g);
    for (int m = 0; m <= spec.n(); ++m) {
      const double thr = threshold(m, spec.n(), spec.wall_bc());
      if (!(thr > 0.0)) continue;
      const EigenPairs pr = class_eigenpairs(op, m, k, 0.5 * thr);
      for (std::size_t j = 0; j < pr.values.size(); ++j)
        table.rows.push_back({m, static_cast<int>(j), g, pr.values[j]});
    }
  }

  const double l_min = steps_at_l.begin()->first;
  const double l_max = steps_at_l.rbegin()->first;
  std::map<std::pair<int, int>, std::vector<const ConvergenceRow*>> by_mode;
  for (const auto& r : table.rows) by_mode[{r.m, r.index}].push_back(&r);
  for (const auto& [key, rows] : by_mode) {
    std::vector<const ConvergenceRow*> at_max;
    for (const auto* r : rows)
      if (r->grid.l == l_max) at_max.push_back(r);
    if (at_max.empty()) continue;
    std::sort(at_max.begin(), at_max.end(),
              [](const ConvergenceRow* p, const ConvergenceRow* q) { return p->grid.hx > q->grid.hx; });
    ConvergenceSummary s;
    s.m = key.first;
    s.index = key.second;
    s.mu_finest = at_max.back()->mu;
    s.observed_order = kNaN;
    double order = 2.0;
    const std::size_t c = at_max.size();
    if (c >= 3) {
      const double d1 = std::fabs(at_max[c - 3]->mu - at_max[c - 2]->mu);
      const double d2 = std::fabs(at_max[c - 2]->mu - at_max[c - 1]->mu);
      if (d1 > 0.0 && d2 > 0.0) {
        s.observed_order = std::log2(d1 / d2);
        if (s.observed_order > 0.5) order = s.observed_order;
      }
    }
    s.richardson = c >= 2 ? at_max[c - 1]->mu + (at_max[c - 1]->mu - at_max[c - 2]->mu) / (std::pow(2.0, order) - 1.0)
                          : s.mu_finest;
    // finest step available at both ends of the L range
    double common = std::numeric_limits<double>::infinity();
    const ConvergenceRow* lo_row = nullptr;
    const ConvergenceRow* hi_row = nullptr;
    for (const auto* p : rows)
      for (const auto* q : rows)
        if (p->grid.l == l_min && q->grid.l == l_max && p->grid.hx == q->grid.hx && p->grid.hy == q->grid.hy &&
            p->grid.hx < common) {
          common = p->grid.hx;
          lo_row = p;
          hi_row = q;
        }
    s.l_sensitivity = lo_row ? std::fabs(hi_row->mu - lo_row->mu) : kNaN;
    const double thr = threshold(s.m, spec.n(), spec.wall_bc());
    s.decay_bound = std::exp(-2.0 * std::sqrt(std::max(thr - s.mu_finest, 0.0)) * (l_min - spec.a()));
    table.summary.push_back(s);
  }
  return table;
}

}  // namespace trapmodes
