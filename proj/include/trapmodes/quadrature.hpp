#pragma once

// Adaptive composite Gauss-Legendre quadrature for vector-valued integrands.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace trapmodes::quad {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

/// The 16-point rule used by the adaptive integrators (computed once).
const GaussRule& default_rule();

struct Stats {
  int panels = 0;
  long evaluations = 0;
  bool converged = true;
};

namespace detail {

template <std::size_t K, class F>
std::array<double, K> apply_rule(const F& f, double lo, double hi, long& evals) {
  const GaussRule& rule = default_rule();
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  std::array<double, K> acc{};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const std::array<double, K> v = f(mid + half * rule.nodes[i]);
    for (std::size_t k = 0; k < K; ++k) acc[k] += rule.weights[i] * v[k];
  }
  evals += static_cast<long>(rule.nodes.size());
  for (auto& a : acc) a *= half;
  return acc;
}

template <std::size_t K, class F>
std::array<double, K> apply_rule_abs(const F& f, double lo, double hi, long& evals) {
  const GaussRule& rule = default_rule();
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  std::array<double, K> acc{};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const std::array<double, K> v = f(mid + half * rule.nodes[i]);
    for (std::size_t k = 0; k < K; ++k) acc[k] += rule.weights[i] * std::fabs(v[k]);
  }
  evals += static_cast<long>(rule.nodes.size());
  for (auto& a : acc) a *= std::fabs(half);
  return acc;
}

template <std::size_t K, class F>
void refine(const F& f, double lo, double hi, const std::array<double, K>& whole,
            const std::array<double, K>& tol_density, int depth, std::array<double, K>& out,
            Stats& stats) {
  const double mid = 0.5 * (lo + hi);
  const auto left = apply_rule<K>(f, lo, mid, stats.evaluations);
  const auto right = apply_rule<K>(f, mid, hi, stats.evaluations);
  bool ok = true;
  const double len = hi - lo;
  for (std::size_t k = 0; k < K; ++k) {
    const double diff = std::fabs(left[k] + right[k] - whole[k]);
    if (diff > tol_density[k] * len) ok = false;
  }
  if (ok || depth >= 48) {
    if (!ok) stats.converged = false;
    for (std::size_t k = 0; k < K; ++k) out[k] += left[k] + right[k];
    stats.panels += 2;
    return;
  }
  refine<K>(f, lo, mid, left, tol_density, depth + 1, out, stats);
  refine<K>(f, mid, hi, right, tol_density, depth + 1, out, stats);
}

}  // namespace detail

/// Integrates each component of f over the union of consecutive pieces
/// [breaks[i], breaks[i+1]] to relative tolerance rtol. The integrand may have
/// kinks at the breakpoints only. Components are judged separately against
/// max(|I_k|, 1e-3 * ∫|f_k|) so that exact cancellations terminate.
template <std::size_t K, class F>
std::array<double, K> integrate(const F& f, std::span<const double> breaks, double rtol,
                                Stats* stats = nullptr) {
  Stats local;
  Stats& st = stats ? *stats : local;
  std::array<double, K> coarse{};
  std::array<double, K> coarse_abs{};
  std::vector<std::array<double, K>> pieces;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) {
      pieces.push_back({});
      continue;
    }
    const auto piece = detail::apply_rule<K>(f, breaks[i], breaks[i + 1], st.evaluations);
    const auto piece_abs = detail::apply_rule_abs<K>(f, breaks[i], breaks[i + 1], st.evaluations);
    for (std::size_t k = 0; k < K; ++k) {
      coarse[k] += piece[k];
      coarse_abs[k] += piece_abs[k];
    }
    pieces.push_back(piece);
  }
  const double total_len = breaks.empty() ? 0.0 : breaks.back() - breaks.front();
  if (!(total_len > 0.0)) return {};
  std::array<double, K> tol_density{};
  for (std::size_t k = 0; k < K; ++k) {
    const double scale = std::max(std::fabs(coarse[k]), 1e-3 * coarse_abs[k]);
    tol_density[k] = rtol * scale / total_len;
  }
  std::array<double, K> out{};
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    detail::refine<K>(f, breaks[i], breaks[i + 1], pieces[i], tol_density, 0, out, st);
  }
  return out;
}

template <std::size_t K, class F>
std::array<double, K> integrate(const F& f, double lo, double hi, double rtol,
                                Stats* stats = nullptr) {
  const std::array<double, 2> b{lo, hi};
  return integrate<K>(f, std::span<const double>(b), rtol, stats);
}

/// Scalar convenience wrapper.
template <class F>
double integrate_scalar(const F& f, double lo, double hi, double rtol, Stats* stats = nullptr) {
  auto g = [&](double x) { return std::array<double, 1>{f(x)}; };
  return integrate<1>(g, lo, hi, rtol, stats)[0];
}

}  // namespace trapmodes::quad
