#include "opseq/distances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace opseq {

double hankel_tail_bound(const TrigSymbol& phi, Eigen::Index n) {
  // The anti-diagonal i + j = s is a partial flip scaled by phi_{-(s+1)}; the
  // n x n window contains all of it only for s < n.
  double mass = phi.tail_bound();
  for (const auto& [k, c] : phi.coeffs()) {
    if (k >= 0) break;
    if (-k - 1 >= n) mass += std::abs(c);
  }
  return mass;
}

double dist_hinf(const TrigSymbol& phi, Eigen::Index n, const NormOptions& norm) {
  if (n < 1) throw InvalidInput("Hankel dimension must be at least 1");
  if (phi.is_exact() && n < phi.negative_extent())
    throw InvalidInput("Hankel dimension " + std::to_string(n) + " does not cover the negative support " +
                       std::to_string(phi.negative_extent()));
  if (phi.is_analytic()) return 0.0;
  return operator_norm(hankel_matrix(phi, n), norm);
}

DistanceTrace dist_hinf_plus_c(const TrigSymbol& phi, Eigen::Index n, int n_max, const NormOptions& norm) {
  if (n_max < 1) throw InvalidInput("n_max must be at least 1");
  DistanceTrace tr;
  tr.symbol = phi;
  for (int k = 0; k <= n_max; ++k) {
    const double d = dist_hinf(symbol_rotate(phi, k), n, norm);
    if (!tr.per_n.empty()) tr.monotone_violation = std::max(tr.monotone_violation, d - tr.per_n.back().second);
    tr.per_n.emplace_back(k, d);
  }
  tr.limit_estimate = tr.per_n.back().second;
  if (tr.per_n.size() >= 3) {
    const auto s = tr.per_n.size();
    const double a = tr.per_n[s - 3].second;
    const double b = tr.per_n[s - 2].second;
    const double c = tr.per_n[s - 1].second;
    const double spread = std::max({a, b, c}) - std::min({a, b, c});
    tr.slow_decay = spread < 1e-3 && std::min({a, b, c}) > 1e-2;
  }
  return tr;
}

HartmanSarasonReport hartman_sarason_report(const BlaschkeSpec& theta, const TrigSymbol& f, int n_max, int order,
                                            const NormOptions& norm) {
  theta.validate();
  if (theta.degree() < 1) throw InvalidInput("theta must have degree >= 1");
  if (!f.is_analytic()) throw InvalidInput("f must be analytic");
  if (n_max < 0) throw InvalidInput("n_max must be nonnegative");

  constexpr double kTail = 1e-13;
  if (order <= 0) order = std::max(blaschke_required_order(theta, kTail), tm_required_order(theta, kTail));

  HartmanSarasonReport r;
  r.order = order;
  const ModelBasis basis = tm_basis(theta, order);
  const Matrix s_theta = model_compression(basis, monomial(1)).entries();
  const Matrix f_theta = model_compression(basis, f).entries();

  const TrigSymbol theta_sym = blaschke_symbol(theta, order);
  const TrigSymbol symbol = symbol_mul(symbol_conj_reflect(theta_sym), f);
  r.hankel_dim = std::max<Eigen::Index>(1, symbol.negative_extent() / 2 + 1);
  r.tail_bound = hankel_tail_bound(symbol, r.hankel_dim) + basis.tail_bound;

  r.model_norm = operator_norm(f_theta, norm);
  r.nehari_norm = dist_hinf(symbol, r.hankel_dim, norm);
  r.max_discrepancy = std::abs(r.model_norm - r.nehari_norm);

  Matrix chain = f_theta;
  for (int k = 0; k <= n_max; ++k) {
    const double m = operator_norm(chain, norm);
    const double h = dist_hinf(symbol_rotate(symbol, k), r.hankel_dim, norm);
    r.model_chain.push_back(m);
    r.hankel_chain.push_back(h);
    r.max_discrepancy = std::max(r.max_discrepancy, std::abs(m - h));
    chain = s_theta * chain;
  }
  r.limit_estimate = std::max(r.model_chain.back(), r.hankel_chain.back());
  r.finite_rank_limit_ok = r.limit_estimate <= 1e-6;
  return r;
}

SigmaUReport sigma_u_estimate(const BlaschkeSpec& theta, std::size_t circle_grid, int m_max, double threshold) {
  theta.validate();
  if (theta.degree() < 1) throw InvalidInput("theta must have degree >= 1");
  if (circle_grid < 1) throw InvalidInput("circle grid must be nonempty");
  if (!(threshold > 0.0)) throw InvalidInput("threshold must be positive");

  SigmaUReport r;
  r.theta = theta;
  r.threshold = threshold;
  r.m0 = static_cast<int>(std::ceil(std::log2(static_cast<double>(theta.degree())))) + 4;
  if (m_max < r.m0) throw InvalidInput("radial levels must reach m0 = " + std::to_string(r.m0));
  for (int m = 1; m <= m_max; ++m) r.radii.push_back(1.0 - std::ldexp(1.0, -m));

  for (std::size_t g = 0; g < circle_grid; ++g) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(g) / static_cast<double>(circle_grid);
    const cplx xi = g == 0 ? cplx{1.0, 0.0} : std::polar(1.0, angle);
    r.grid.push_back(xi);
    std::vector<double> profile;
    double tail_min = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= m_max; ++m) {
      const double v = std::abs(theta.evaluate(r.radii[static_cast<std::size_t>(m - 1)] * xi));
      profile.push_back(v);
      if (m >= r.m0) tail_min = std::min(tail_min, v);
    }
    r.radial_profile.push_back(std::move(profile));
    r.tail_minimum.push_back(tail_min);
    if (tail_min < threshold) r.flagged_points.push_back(xi);
  }
  return r;
}

namespace {

bool is_diagonal(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != cplx{}) return false;
  return true;
}

} // namespace

PeripheralReport peripheral_sup_check(const OperatorMatrix& t, const TrigSymbol& p, int n_max,
                                      const NormOptions& norm) {
  if (!is_diagonal(t.entries())) throw InvalidInput("spectrum is only readable for diagonal operators");
  if (!p.is_analytic()) throw InvalidInput("p must be an analytic polynomial");
  if (n_max < 0) throw InvalidInput("n_max must be nonnegative");

  PeripheralReport r;
  const Vector lambda = t.entries().diagonal();
  Vector pl(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    pl(i) = p(lambda(i));
    if (std::abs(std::abs(lambda(i)) - 1.0) <= 1e-12) {
      r.peripheral_spectrum.push_back(lambda(i));
      r.peripheral_sup = std::max(r.peripheral_sup, std::abs(pl(i)));
    }
  }
  Vector current = pl;
  for (int n = 0; n <= n_max; ++n) {
    r.trace.push_back(operator_norm(Matrix(current.asDiagonal()), norm));
    current = current.cwiseProduct(lambda);
  }
  r.limit_estimate = r.trace.back();
  r.discrepancy = std::abs(r.limit_estimate - r.peripheral_sup);
  return r;
}

PeripheralReport peripheral_sup_check_shift(const TrigSymbol& p, Eigen::Index n, int n_max,
                                            const NormOptions& norm) {
  if (!p.is_analytic()) throw InvalidInput("p must be an analytic polynomial");
  if (!p.is_exact()) throw InvalidInput("p must be an exact polynomial");
  if (n < 1 || n_max < 0) throw InvalidInput("need N >= 1 and n_max >= 0");

  PeripheralReport r;
  const std::size_t grid = std::max<std::size_t>(kDefaultSupGrid, 4 * static_cast<std::size_t>(p.max_index()));
  r.peripheral_sup = sup_norm_grid(p, grid);
  const Eigen::Index dim = n + n_max + p.max_index();
  for (int k = 0; k <= n_max; ++k) {
    // S^k p(S) = T_{z^k p}; keep the columns of span{e_0..e_{N-1}}
    Matrix m = toeplitz_matrix(symbol_rotate(p, k), dim).entries();
    m.rightCols(dim - n).setZero();
    r.trace.push_back(operator_norm(m, norm));
  }
  r.limit_estimate = r.trace.back();
  r.discrepancy = std::abs(r.limit_estimate - r.peripheral_sup);
  return r;
}

} // namespace opseq
