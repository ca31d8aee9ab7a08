#pragma once

///
/// \file distances.hpp
///
/// Best-approximation distances computed as Hankel norms:
///   dist(phi, H^inf)            = ||H_phi||
///   dist(phi, conj(z)^n H^inf)  = ||H_{z^n phi}||
///   dist(phi, H^inf + C)        = lim_n of the above
/// together with model-space cross-checks, the radial Sigma_u estimator and
/// the peripheral-spectrum supremum test.
///

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opseq/operators.hpp"

namespace opseq {

inline constexpr Eigen::Index kDefaultHankelDim = 1024;

/// ||hankel_matrix(phi, n)||.  For exact symbols n must cover the negative
/// support; truncated symbols may be cut, see hankel_tail_bound.
double dist_hinf(const TrigSymbol& phi, Eigen::Index n = kDefaultHankelDim, const NormOptions& norm = {});

/// Bound on ||H_phi|| - ||H_phi restricted to n x n||: the l1 mass of the
/// anti-diagonals not fully inside the window plus the symbol's own tail.
double hankel_tail_bound(const TrigSymbol& phi, Eigen::Index n);

struct DistanceTrace {
  TrigSymbol symbol;
  std::vector<std::pair<int, double>> per_n;
  double limit_estimate = 0.0;
  double monotone_violation = 0.0; ///< largest increase between consecutive values
  bool slow_decay = false;
};

DistanceTrace dist_hinf_plus_c(const TrigSymbol& phi, Eigen::Index n, int n_max, const NormOptions& norm = {});

struct HartmanSarasonReport {
  double model_norm = 0.0;  ///< ||f(S_theta)||
  double nehari_norm = 0.0; ///< dist(conj(theta) f, H^inf)
  std::vector<double> model_chain;  ///< ||S_theta^n f(S_theta)||
  std::vector<double> hankel_chain; ///< dist(z^n conj(theta) f, H^inf)
  double max_discrepancy = 0.0;
  double limit_estimate = 0.0;
  bool finite_rank_limit_ok = false; ///< limit ~ 0, as it must be for finite theta
  int order = 0;                     ///< Taylor truncation used for theta and the TM basis
  Eigen::Index hankel_dim = 0;
  double tail_bound = 0.0;
};

/// order = 0 picks the smallest order certified to 1e-13.
HartmanSarasonReport hartman_sarason_report(const BlaschkeSpec& theta, const TrigSymbol& f, int n_max,
                                            int order = 0, const NormOptions& norm = {});

struct SigmaUReport {
  BlaschkeSpec theta;
  std::vector<cplx> flagged_points;
  std::vector<cplx> grid;
  std::vector<double> radii;
  /// radial_profile[g][m] = |theta(r_m xi_g)|
  std::vector<std::vector<double>> radial_profile;
  std::vector<double> tail_minimum;
  double threshold = 0.0;
  int m0 = 0;
};

inline constexpr double kSigmaUThreshold = 1e-3;

/// Radii r_m = 1 - 2^{-m}, m = 1..m_max; a grid point is flagged when
/// min_{m >= m0} |theta(r_m xi)| < threshold with m0 = ceil(log2 degree) + 4.
SigmaUReport sigma_u_estimate(const BlaschkeSpec& theta, std::size_t circle_grid = 256, int m_max = 40,
                              double threshold = kSigmaUThreshold);

struct PeripheralReport {
  std::vector<double> trace; ///< ||T^n p(T)||, n = 0..n_max
  double peripheral_sup = 0.0;
  double limit_estimate = 0.0;
  double discrepancy = 0.0;
  std::vector<cplx> peripheral_spectrum; ///< empty for the shift path (whole circle)
};

/// T must be diagonal; its peripheral spectrum is read off the diagonal.
PeripheralReport peripheral_sup_check(const OperatorMatrix& t, const TrigSymbol& p, int n_max,
                                      const NormOptions& norm = {});

/// T = S on H^2.  S^n p(S) is realized exactly on span{e_0..e_{N-1}} and
/// the supremum over the circle comes from sup_norm_grid.
PeripheralReport peripheral_sup_check_shift(const TrigSymbol& p, Eigen::Index n, int n_max,
                                            const NormOptions& norm = {});

} // namespace opseq
