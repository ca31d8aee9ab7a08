#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "opseq/operators.hpp"

namespace opseq {

NormNotConverged::NormNotConverged(double est, double res, int iters)
    : std::runtime_error("operator norm did not converge after " + std::to_string(iters) +
                         " iterations (estimate " + std::to_string(est) + ", residual " + std::to_string(res) + ")"),
      estimate(est), residual(res), iterations(iters) {}

namespace {

struct RitzPair {
  double value;
  double last_component;
};

// Largest eigenvalue of the symmetric tridiagonal (alpha, beta) and the last
// component of its unit eigenvector.  Eigenvalues come from the O(k^2) QL
// sweep; the eigenvector from inverse iteration shifted just above the top
// eigenvalue, where T - sigma I is negative definite and the Thomas
// elimination is stable.
RitzPair top_ritz(const std::vector<double>& alpha, const std::vector<double>& beta, std::size_t k) {
  Eigen::VectorXd diag(static_cast<Eigen::Index>(k));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(k > 0 ? k - 1 : 0));
  for (std::size_t i = 0; i < k; ++i) diag(static_cast<Eigen::Index>(i)) = alpha[i];
  for (std::size_t i = 0; i + 1 < k; ++i) sub(static_cast<Eigen::Index>(i)) = beta[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const double theta = es.eigenvalues()(static_cast<Eigen::Index>(k - 1));
  if (k == 1) return {theta, 1.0};

  double span = 0.0;
  for (std::size_t i = 0; i < k; ++i) span = std::max(span, std::abs(alpha[i]) + (i + 1 < k ? 2.0 * beta[i] : 0.0));
  const double sigma = theta + std::max(1e-13 * span, std::numeric_limits<double>::min());

  std::vector<double> x(k, 1.0);
  std::vector<double> c(k);
  std::vector<double> d(k);
  for (int it = 0; it < 3; ++it) {
    // solve (T - sigma I) y = x by forward elimination / back substitution
    double denom = alpha[0] - sigma;
    c[0] = beta[0] / denom;
    d[0] = x[0] / denom;
    for (std::size_t i = 1; i < k; ++i) {
      denom = (alpha[i] - sigma) - beta[i - 1] * c[i - 1];
      c[i] = i + 1 < k ? beta[i] / denom : 0.0;
      d[i] = (x[i] - beta[i - 1] * d[i - 1]) / denom;
    }
    x[k - 1] = d[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    for (double& v : x) v /= nrm;
  }
  return {theta, x[k - 1]};
}

bool check_due(std::size_t k) { return k < 16 || k % std::max<std::size_t>(1, k / 8) == 0; }

} // namespace

NormResult norm_report(const Matrix& input, const NormOptions& opts) {
  if (!(opts.rel_tol > 0.0)) throw InvalidInput("norm tolerance must be positive");
  const Eigen::Index n = input.cols();
  if (n == 0 || input.rows() == 0) return {};
  const double scale = input.cwiseAbs().maxCoeff();
  if (scale == 0.0) return {0.0, 0.0, 0};
  // work at unit entry scale so thresholds are relative
  const Matrix t = input / scale;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  Vector q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = cplx{gauss(rng), gauss(rng)};
  q.normalize();

  const auto kmax = static_cast<std::size_t>(std::min<Eigen::Index>(n, opts.max_iter));
  Matrix basis(n, static_cast<Eigen::Index>(kmax));
  std::vector<double> alpha;
  std::vector<double> beta;
  alpha.reserve(kmax);
  beta.reserve(kmax);

  // Breakdown threshold relative to ||T*T||, which is at most n here.
  const double breakdown = 1e-14 * static_cast<double>(n);
  RitzPair ritz{0.0, 1.0};
  double residual = std::numeric_limits<double>::infinity();

  for (std::size_t k = 0; k < kmax; ++k) {
    basis.col(static_cast<Eigen::Index>(k)) = q;
    Vector w = t.adjoint() * (t * q);
    const double a = (q.adjoint() * w)(0).real();
    alpha.push_back(a);
    w -= a * q;
    if (k > 0) w -= beta[k - 1] * basis.col(static_cast<Eigen::Index>(k - 1));
    // full reorthogonalization, twice is enough
    const auto used = basis.leftCols(static_cast<Eigen::Index>(k + 1));
    for (int pass = 0; pass < 2; ++pass) w -= used * (used.adjoint() * w);
    const double b = w.norm();
    beta.push_back(b);

    const bool invariant = b <= breakdown || k + 1 == static_cast<std::size_t>(n);
    if (invariant || check_due(k + 1) || k + 1 == kmax) {
      ritz = top_ritz(alpha, beta, k + 1);
      residual = invariant ? 0.0 : b * std::abs(ritz.last_component);
      const double theta = std::max(ritz.value, 0.0);
      if (invariant || residual <= opts.rel_tol * theta)
        return {scale * std::sqrt(theta), scale * scale * residual, static_cast<int>(k + 1)};
    }
    if (invariant) break;
    q = w / b;
  }
  throw NormNotConverged(scale * std::sqrt(std::max(ritz.value, 0.0)), scale * scale * residual,
                         static_cast<int>(kmax));
}

double operator_norm(const Matrix& t, const NormOptions& opts) { return norm_report(t, opts).value; }

double operator_norm(const OperatorMatrix& t, const NormOptions& opts) { return norm_report(t.entries(), opts).value; }

} // namespace opseq
