#pragma once

///
/// \file asymptotics.hpp
///
/// Sequence engine for X_n = A^n T B^n and its Cesaro means
/// C_n = (1/n) sum_{i<n} X_i.
///
/// Two evaluation paths:
///  - window_sequence: for A = S*, B = S the step is the principal window
///    T_{i+n, j+n} of a larger matrix, which is exact (no truncation);
///  - conjugation_sequence: iterates A X B at a padded dimension and reports
///    the leading block; exactness is not certified and a heuristic
///    truncation warning is carried along.
///

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "opseq/operators.hpp"

namespace opseq {

enum class TraceKind { power, cesaro };
std::string to_string(TraceKind k);

struct TraceStep {
  std::size_t n = 0;
  std::optional<Matrix> matrix; ///< dropped beyond the retention cap
  double norm = 0.0;
  std::optional<double> increment; ///< ||X_{n+1} - X_n||; absent when X_{n+1} is unknown
};

struct SequenceTrace {
  TraceKind kind = TraceKind::power;
  std::vector<TraceStep> steps;
  Eigen::Index window_dim = 0;
  Eigen::Index padding = 0;
  bool truncation_warning = false;

  bool fully_retained() const;
};

struct TraceOptions {
  NormOptions norm;
  /// Number of leading steps whose matrices are kept; later steps keep norms
  /// only, except the final step, which always keeps its matrix.
  std::size_t retain = 64;
  static constexpr std::size_t kRetainAll = std::numeric_limits<std::size_t>::max();
};

/// Steps n = 0..n_max, step n being the N x N window of `big` at offset n.
SequenceTrace window_sequence(const OperatorMatrix& big, Eigen::Index n, std::size_t n_max,
                              const TraceOptions& opts = {});

/// Steps n = 0..n_max of X_{n+1} = A X_n B at the common dimension of the
/// inputs, reporting the leading N x N block.
SequenceTrace conjugation_sequence(const OperatorMatrix& a, const OperatorMatrix& t, const OperatorMatrix& b,
                                   Eigen::Index n, std::size_t n_max, const TraceOptions& opts = {});

/// Cesaro means of a power trace; step index n >= 1 holds C_n.  Requires
/// every matrix of the input to be retained.
SequenceTrace cesaro_trace(const SequenceTrace& power, const NormOptions& norm = {});

// --- convergence ----------------------------------------------------------

enum class ConvergenceStatus { converged, non_convergent, indeterminate };
std::string to_string(ConvergenceStatus s);

struct ConvergenceEvidence {
  double max_pairwise_deviation = 0.0; ///< over the last window_w steps (bounded by increments if dropped)
  bool deviation_exact = true;         ///< false when the deviation is an increment-sum bound
  double min_increment = 0.0;          ///< over the last window_w increments
  double persistent_fraction = 0.0;    ///< share of those increments >= 10 tol
  std::optional<double> cauchy_gap;    ///< ||X_{floor(n/2)} - X_n|| at the last step n
};

struct ConvergenceVerdict {
  ConvergenceStatus status = ConvergenceStatus::indeterminate;
  std::optional<Matrix> limit;
  double tol = 0.0;
  std::size_t window_w = 0;
  ConvergenceEvidence evidence;
};

inline constexpr double kDefaultTol = 1e-6;
inline constexpr std::size_t kDefaultWindow = 8;
inline constexpr double kNonConvergenceFactor = 10.0;
inline constexpr double kPersistenceQuota = 0.8;

ConvergenceVerdict detect_convergence(const SequenceTrace& trace, double tol = kDefaultTol,
                                      std::size_t window_w = kDefaultWindow, const NormOptions& norm = {});

// --- decomposition --------------------------------------------------------

struct DecompositionResult {
  Matrix t0;
  Matrix k;
  double fixed_point_residual = 0.0;
  double compactness_score = 0.0; ///< norm of K outside its leading half block
};

/// T = T0 + K with T0 the limit of a converged trace.  The fixed-point
/// residual ||A T0 B - T0|| is measured on the leading (N - guard) block,
/// which discounts boundary rows that a finite A, B cannot reproduce.
DecompositionResult asymptotic_decomposition(const ConvergenceVerdict& verdict, const OperatorMatrix& t,
                                             const OperatorMatrix& a, const OperatorMatrix& b,
                                             Eigen::Index guard = 0, const NormOptions& norm = {});

/// Shift case A = S*, B = S: residual is ||T0[1:,1:] - T0[:-1,:-1]||.
DecompositionResult asymptotic_decomposition_shift(const ConvergenceVerdict& verdict, const OperatorMatrix& t,
                                                   const NormOptions& norm = {});

/// Runs detect_convergence and rejects non-converged traces.
DecompositionResult asymptotic_decomposition_shift(const SequenceTrace& trace, const OperatorMatrix& t,
                                                   double tol = kDefaultTol, std::size_t window_w = kDefaultWindow,
                                                   const NormOptions& norm = {});

// --- essential norm -------------------------------------------------------

struct EssNormResult {
  double estimate = 0.0;  ///< last window norm
  double tail_mean = 0.0; ///< over the last quarter of the windows
  double tail_spread = 0.0;
  bool monotone = true; ///< window norms nonincreasing (not guaranteed in general)
  SequenceTrace trace;
};

EssNormResult ess_norm_estimate(const OperatorMatrix& big, Eigen::Index n, std::size_t n_max,
                                const TraceOptions& opts = {});

// --- Tauberian step -------------------------------------------------------

enum class SpectralRegion { d_plus_d_minus, d_minus_d_plus, outside, not_triangular };
std::string to_string(SpectralRegion r);

/// For triangular A, B: checks sigma(A) in D+ and sigma(B) in D- (or the
/// mirrored pair), where D+- = {Re z >= 1, +-Im z >= 0}.
SpectralRegion spectral_region_certificate(const OperatorMatrix& a, const OperatorMatrix& b);

struct TauberianReport {
  bool increments_vanish = false;
  bool cesaro_converged = false; ///< C_n settled, or its extrapolated limit is stable from n/2 to n
  bool power_converged = false;
  double last_increment = 0.0;
  double limit_gap = 0.0; ///< ||power limit - extrapolated Cesaro limit||
  bool hypotheses_hold = false;
  bool conclusion_holds = false;
  bool defect = false; ///< hypotheses hold but the conclusion fails
  std::optional<Matrix> cesaro_limit;
  std::optional<SpectralRegion> region;
  std::string summary;
};

/// Richardson estimate 2 C_n - C_{n/2} of the Cesaro limit at the last step.
/// Exact up to (1/n) times the tail of sum_i (X_i - L), so geometric
/// transients are removed.
std::optional<Matrix> cesaro_limit_estimate(const SequenceTrace& cesaro);

TauberianReport tauberian_report(const SequenceTrace& power, const SequenceTrace& cesaro, double tol = kDefaultTol,
                                 std::size_t window_w = kDefaultWindow, const OperatorMatrix* a = nullptr,
                                 const OperatorMatrix* b = nullptr);

// --- polynomial averages and the compact-perturbation gap -----------------

/// (I + T + ... + T^{k-1}) / k
OperatorMatrix averaged_operator(const OperatorMatrix& t, int k);

struct GapReport {
  double norm_k = 0.0;
  double norm_sum = 0.0; ///< ||K + T0||
  std::optional<double> ratio; ///< ||K + T0|| / ||K||, absent when K = 0
  bool vacuous = false;
  bool holds = false;
};

inline constexpr double kFixedPointCertificate = 1e-10;

/// Checks ||K + T0|| >= ||K|| / 2 - tol for a fixed point T0 of X -> A X B
/// certified by `fixed_point_residual`.
GapReport perturbation_gap_check(const OperatorMatrix& k, const OperatorMatrix& t0, double fixed_point_residual,
                                 double tol = 1e-12, const NormOptions& norm = {});
GapReport perturbation_gap_check(const OperatorMatrix& k, const OperatorMatrix& t0, const OperatorMatrix& a,
                                 const OperatorMatrix& b, double tol = 1e-12, const NormOptions& norm = {});

} // namespace opseq
