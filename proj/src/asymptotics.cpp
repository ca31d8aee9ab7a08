#include "opseq/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace opseq {

std::string to_string(TraceKind k) { return k == TraceKind::power ? "power" : "cesaro"; }

std::string to_string(ConvergenceStatus s) {
  switch (s) {
  case ConvergenceStatus::converged: return "converged";
  case ConvergenceStatus::non_convergent: return "non_convergent";
  case ConvergenceStatus::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

std::string to_string(SpectralRegion r) {
  switch (r) {
  case SpectralRegion::d_plus_d_minus: return "A in D+, B in D-";
  case SpectralRegion::d_minus_d_plus: return "A in D-, B in D+";
  case SpectralRegion::outside: return "outside";
  case SpectralRegion::not_triangular: return "not_triangular";
  }
  return "outside";
}

bool SequenceTrace::fully_retained() const {
  return std::all_of(steps.begin(), steps.end(), [](const TraceStep& s) { return s.matrix.has_value(); });
}

namespace {

// Norm of a step, reusing the previous value when the matrix repeats exactly.
class StepNormer {
public:
  explicit StepNormer(const NormOptions& opts) : opts_(opts) {}

  double operator()(const Matrix& m) {
    if (prev_.size() == m.size() && prev_.rows() == m.rows() && prev_ == m) return prev_norm_;
    prev_norm_ = operator_norm(m, opts_);
    prev_ = m;
    return prev_norm_;
  }

private:
  NormOptions opts_;
  Matrix prev_;
  double prev_norm_ = 0.0;
};

void push_step(SequenceTrace& trace, std::size_t n, const Matrix& m, double norm, const TraceOptions& opts,
               bool last) {
  TraceStep step;
  step.n = n;
  step.norm = norm;
  if (n < opts.retain || last) step.matrix = m;
  trace.steps.push_back(std::move(step));
}

double trailing_mass(const Matrix& m, Eigen::Index n) {
  const double total = m.squaredNorm();
  const double lead = m.topLeftCorner(n, n).squaredNorm();
  return std::sqrt(std::max(0.0, total - lead));
}

} // namespace

SequenceTrace window_sequence(const OperatorMatrix& big, Eigen::Index n, std::size_t n_max,
                              const TraceOptions& opts) {
  if (n < 1) throw InvalidInput("window dimension must be at least 1");
  const auto need = n + static_cast<Eigen::Index>(n_max);
  if (big.dim() < need)
    throw InvalidInput("window sequence needs a matrix of dimension >= N + n_max = " + std::to_string(need));

  SequenceTrace trace;
  trace.kind = TraceKind::power;
  trace.window_dim = n;
  trace.padding = big.dim() - need;

  StepNormer normer(opts.norm);
  StepNormer inc_normer(opts.norm);
  const Matrix& t = big.entries();
  for (std::size_t s = 0; s <= n_max; ++s) {
    const auto off = static_cast<Eigen::Index>(s);
    const Matrix x = t.block(off, off, n, n);
    push_step(trace, s, x, normer(x), opts, s == n_max);
    if (off + 1 + n <= big.dim()) trace.steps.back().increment = inc_normer(t.block(off + 1, off + 1, n, n) - x);
  }
  return trace;
}

SequenceTrace conjugation_sequence(const OperatorMatrix& a, const OperatorMatrix& t, const OperatorMatrix& b,
                                   Eigen::Index n, std::size_t n_max, const TraceOptions& opts) {
  const Eigen::Index m = t.dim();
  if (a.dim() != m || b.dim() != m) throw InvalidInput("A, T, B must share one dimension");
  if (n < 1 || n > m) throw InvalidInput("reported block must satisfy 1 <= N <= dim");
  if (n_max < 1) throw InvalidInput("n_max must be at least 1");

  SequenceTrace trace;
  trace.kind = TraceKind::power;
  trace.window_dim = n;
  trace.padding = m - n;

  StepNormer normer(opts.norm);
  StepNormer inc_normer(opts.norm);
  Matrix x = t.entries();
  Matrix a_pow = Matrix::Identity(m, m);
  Matrix b_pow = Matrix::Identity(m, m);
  for (std::size_t s = 0; s <= n_max; ++s) {
    const Matrix lead = x.topLeftCorner(n, n);
    push_step(trace, s, lead, normer(lead), opts, s == n_max);
    if (trailing_mass(a_pow, n) > 1e-8 || trailing_mass(b_pow, n) > 1e-8) trace.truncation_warning = true;
    Matrix next = a.entries() * x * b.entries();
    trace.steps.back().increment = inc_normer(next.topLeftCorner(n, n) - lead);
    x = std::move(next);
    a_pow = a.entries() * a_pow;
    b_pow = b_pow * b.entries();
  }
  return trace;
}

SequenceTrace cesaro_trace(const SequenceTrace& power, const NormOptions& norm) {
  if (power.kind != TraceKind::power) throw InvalidInput("Cesaro means need a power trace");
  if (power.steps.empty()) throw InvalidInput("empty trace");
  if (!power.fully_retained()) throw InvalidInput("Cesaro means need every matrix of the power trace retained");

  SequenceTrace out;
  out.kind = TraceKind::cesaro;
  out.window_dim = power.window_dim;
  out.padding = power.padding;
  out.truncation_warning = power.truncation_warning;

  StepNormer normer(norm);
  StepNormer inc_normer(norm);
  Matrix c = Matrix::Zero(power.window_dim, power.window_dim);
  for (std::size_t i = 0; i < power.steps.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    Matrix next = ((n - 1.0) * c + *power.steps[i].matrix) / n;
    if (i > 0) out.steps.back().increment = inc_normer(next - c);
    c = std::move(next);
    TraceStep step;
    step.n = i + 1;
    step.norm = normer(c);
    step.matrix = c;
    out.steps.push_back(std::move(step));
  }
  return out;
}

ConvergenceVerdict detect_convergence(const SequenceTrace& trace, double tol, std::size_t window_w,
                                      const NormOptions& norm) {
  if (!(tol > 0.0)) throw InvalidInput("tolerance must be positive");
  if (window_w < 1) throw InvalidInput("window must be at least 1");
  if (trace.steps.size() < 2 * window_w)
    throw InvalidInput("convergence detection needs at least 2 * window_w steps");

  ConvergenceVerdict v;
  v.tol = tol;
  v.window_w = window_w;
  const auto& steps = trace.steps;
  const std::size_t first = steps.size() - window_w;

  const bool retained = std::all_of(steps.begin() + static_cast<long>(first), steps.end(),
                                    [](const TraceStep& s) { return s.matrix.has_value(); });
  double deviation = 0.0;
  if (retained) {
    for (std::size_t i = first; i < steps.size(); ++i)
      for (std::size_t j = i + 1; j < steps.size(); ++j)
        deviation = std::max(deviation, operator_norm(Matrix(*steps[j].matrix - *steps[i].matrix), norm));
  } else {
    // triangle inequality through the increments joining the window
    v.evidence.deviation_exact = false;
    for (std::size_t i = first; i + 1 < steps.size(); ++i)
      deviation += steps[i].increment ? *steps[i].increment : std::numeric_limits<double>::infinity();
  }
  v.evidence.max_pairwise_deviation = deviation;

  std::size_t persistent = 0;
  double min_inc = std::numeric_limits<double>::infinity();
  for (std::size_t i = first; i < steps.size(); ++i) {
    if (!steps[i].increment) continue;
    min_inc = std::min(min_inc, *steps[i].increment);
    if (*steps[i].increment >= kNonConvergenceFactor * tol) ++persistent;
  }
  v.evidence.min_increment = std::isfinite(min_inc) ? min_inc : 0.0;
  v.evidence.persistent_fraction = static_cast<double>(persistent) / static_cast<double>(window_w);

  const std::size_t last_n = steps.back().n;
  const auto half = std::find_if(steps.begin(), steps.end(), [&](const TraceStep& s) { return s.n == last_n / 2; });
  if (half != steps.end() && half->matrix && steps.back().matrix)
    v.evidence.cauchy_gap = operator_norm(Matrix(*steps.back().matrix - *half->matrix), norm);

  if (deviation <= tol && steps.back().matrix) {
    v.status = ConvergenceStatus::converged;
    v.limit = *steps.back().matrix;
  } else if (v.evidence.persistent_fraction >= kPersistenceQuota) {
    v.status = ConvergenceStatus::non_convergent;
  } else {
    v.status = ConvergenceStatus::indeterminate;
  }
  return v;
}

namespace {

Matrix leading(const OperatorMatrix& t, Eigen::Index n) {
  if (t.dim() < n) throw InvalidInput("operator is smaller than the limit window");
  return t.entries().topLeftCorner(n, n);
}

void require_converged(const ConvergenceVerdict& v) {
  if (v.status != ConvergenceStatus::converged || !v.limit)
    throw InvalidInput("decomposition needs a converged verdict (got " + to_string(v.status) + ")");
}

DecompositionResult split(const Matrix& t0, const Matrix& t, const NormOptions& norm) {
  DecompositionResult r;
  r.t0 = t0;
  r.k = t - t0;
  const Eigen::Index h = r.k.rows() / 2;
  const Eigen::Index rest = r.k.rows() - h;
  r.compactness_score = rest > 0 ? operator_norm(Matrix(r.k.bottomRightCorner(rest, rest)), norm) : 0.0;
  return r;
}

} // namespace

DecompositionResult asymptotic_decomposition(const ConvergenceVerdict& verdict, const OperatorMatrix& t,
                                             const OperatorMatrix& a, const OperatorMatrix& b, Eigen::Index guard,
                                             const NormOptions& norm) {
  require_converged(verdict);
  const Matrix& t0 = *verdict.limit;
  const Eigen::Index n = t0.rows();
  if (a.dim() != n || b.dim() != n) throw InvalidInput("A, B must match the limit dimension");
  if (guard < 0 || guard >= n) throw InvalidInput("guard must lie in [0, N)");
  auto r = split(t0, leading(t, n), norm);
  const Matrix resid = a.entries() * t0 * b.entries() - t0;
  r.fixed_point_residual = operator_norm(Matrix(resid.topLeftCorner(n - guard, n - guard)), norm);
  return r;
}

DecompositionResult asymptotic_decomposition_shift(const ConvergenceVerdict& verdict, const OperatorMatrix& t,
                                                   const NormOptions& norm) {
  require_converged(verdict);
  const Matrix& t0 = *verdict.limit;
  const Eigen::Index n = t0.rows();
  auto r = split(t0, leading(t, n), norm);
  r.fixed_point_residual =
      n > 1 ? operator_norm(Matrix(t0.bottomRightCorner(n - 1, n - 1) - t0.topLeftCorner(n - 1, n - 1)), norm) : 0.0;
  return r;
}

DecompositionResult asymptotic_decomposition_shift(const SequenceTrace& trace, const OperatorMatrix& t, double tol,
                                                   std::size_t window_w, const NormOptions& norm) {
  return asymptotic_decomposition_shift(detect_convergence(trace, tol, window_w, norm), t, norm);
}

EssNormResult ess_norm_estimate(const OperatorMatrix& big, Eigen::Index n, std::size_t n_max,
                                const TraceOptions& opts) {
  EssNormResult r;
  r.trace = window_sequence(big, n, n_max, opts);
  const auto& steps = r.trace.steps;
  r.estimate = steps.back().norm;
  const std::size_t tail = std::max<std::size_t>(1, steps.size() / 4);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  double sum = 0.0;
  for (std::size_t i = steps.size() - tail; i < steps.size(); ++i) {
    lo = std::min(lo, steps[i].norm);
    hi = std::max(hi, steps[i].norm);
    sum += steps[i].norm;
  }
  r.tail_mean = sum / static_cast<double>(tail);
  r.tail_spread = hi - lo;
  for (std::size_t i = 1; i < steps.size(); ++i)
    if (steps[i].norm > steps[i - 1].norm + 1e-12) r.monotone = false;
  return r;
}

namespace {

bool is_triangular(const Matrix& m) {
  return m.isUpperTriangular(0.0) || m.isLowerTriangular(0.0);
}

bool in_region(const Matrix& m, double sign) {
  constexpr double eps = 1e-12;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const cplx z = m(i, i);
    if (z.real() < 1.0 - eps || sign * z.imag() < -eps) return false;
  }
  return true;
}

} // namespace

SpectralRegion spectral_region_certificate(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (!is_triangular(a.entries()) || !is_triangular(b.entries())) return SpectralRegion::not_triangular;
  if (in_region(a.entries(), 1.0) && in_region(b.entries(), -1.0)) return SpectralRegion::d_plus_d_minus;
  if (in_region(a.entries(), -1.0) && in_region(b.entries(), 1.0)) return SpectralRegion::d_minus_d_plus;
  return SpectralRegion::outside;
}

namespace {

const TraceStep* find_step(const SequenceTrace& t, std::size_t n) {
  const auto it = std::find_if(t.steps.begin(), t.steps.end(), [&](const TraceStep& s) { return s.n == n; });
  return it == t.steps.end() || !it->matrix ? nullptr : &*it;
}

// (n C_n - m C_m) / (n - m) with m = n / 2
std::optional<Matrix> richardson_at(const SequenceTrace& cesaro, std::size_t n) {
  const TraceStep* top = find_step(cesaro, n);
  if (!top) return std::nullopt;
  const std::size_t m = n / 2;
  const TraceStep* half = m > 0 ? find_step(cesaro, m) : nullptr;
  if (!half) return *top->matrix;
  // C_k = L + R_k / k with R_k -> R, so the combination is L + (R_n - R_m) / (n - m)
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return Matrix((dn * *top->matrix - dm * *half->matrix) / (dn - dm));
}

} // namespace

std::optional<Matrix> cesaro_limit_estimate(const SequenceTrace& cesaro) {
  if (cesaro.kind != TraceKind::cesaro || cesaro.steps.empty()) return std::nullopt;
  return richardson_at(cesaro, cesaro.steps.back().n);
}

TauberianReport tauberian_report(const SequenceTrace& power, const SequenceTrace& cesaro, double tol,
                                 std::size_t window_w, const OperatorMatrix* a, const OperatorMatrix* b) {
  if (power.kind != TraceKind::power || cesaro.kind != TraceKind::cesaro)
    throw InvalidInput("tauberian report needs a power trace and its Cesaro trace");

  TauberianReport r;
  double last_inc = 0.0;
  std::size_t seen = 0;
  for (auto it = power.steps.rbegin(); it != power.steps.rend() && seen < window_w; ++it) {
    if (!it->increment) continue;
    last_inc = std::max(last_inc, *it->increment);
    ++seen;
  }
  r.last_increment = last_inc;
  r.increments_vanish = seen > 0 && last_inc <= tol;

  const auto pv = detect_convergence(power, tol, window_w);
  const auto cv = detect_convergence(cesaro, tol, window_w);
  r.power_converged = pv.status == ConvergenceStatus::converged;
  r.cesaro_limit = cesaro_limit_estimate(cesaro);
  // C_n itself settles only at rate 1/n; a stable extrapolated limit also counts
  r.cesaro_converged = cv.status == ConvergenceStatus::converged;
  if (!r.cesaro_converged && r.cesaro_limit) {
    const std::size_t n = cesaro.steps.back().n;
    if (const auto earlier = richardson_at(cesaro, n / 2))
      r.cesaro_converged = operator_norm(Matrix(*r.cesaro_limit - *earlier)) <= tol;
  }
  if (a && b) r.region = spectral_region_certificate(*a, *b);

  r.hypotheses_hold = r.increments_vanish && r.cesaro_converged;
  if (r.power_converged && r.cesaro_limit) {
    r.limit_gap = operator_norm(Matrix(*pv.limit - *r.cesaro_limit));
    r.conclusion_holds = r.limit_gap <= 2.0 * tol;
  }
  r.defect = r.hypotheses_hold && !r.conclusion_holds;

  std::ostringstream os;
  if (!r.hypotheses_hold) {
    os << "hypothesis fails (increments " << (r.increments_vanish ? "vanish" : "do not vanish") << ", Cesaro "
       << to_string(cv.status) << "); no conclusion claimed";
  } else if (r.conclusion_holds) {
    os << "hypotheses hold; power sequence converges to the Cesaro limit (gap " << r.limit_gap << ")";
  } else {
    os << "IMPLEMENTATION DEFECT: hypotheses hold but power sequence is " << to_string(pv.status);
  }
  r.summary = os.str();
  return r;
}

OperatorMatrix averaged_operator(const OperatorMatrix& t, int k) {
  if (k < 2) throw InvalidInput("averaging order k must be at least 2");
  const Eigen::Index n = t.dim();
  Matrix sum = Matrix::Identity(n, n);
  Matrix power = Matrix::Identity(n, n);
  for (int i = 1; i < k; ++i) {
    power = power * t.entries();
    sum += power;
  }
  return OperatorMatrix(sum / static_cast<double>(k), t.basis(), "averaged(" + std::to_string(k) + ")");
}

GapReport perturbation_gap_check(const OperatorMatrix& k, const OperatorMatrix& t0, double fixed_point_residual,
                                 double tol, const NormOptions& norm) {
  if (k.dim() != t0.dim()) throw InvalidInput("K and T0 must share one dimension");
  if (!(fixed_point_residual <= kFixedPointCertificate))
    throw InvalidInput("T0 is not certified as a fixed point (residual " + std::to_string(fixed_point_residual) + ")");
  GapReport r;
  r.norm_k = operator_norm(k, norm);
  r.norm_sum = operator_norm(Matrix(k.entries() + t0.entries()), norm);
  if (r.norm_k == 0.0) {
    r.vacuous = true;
    r.holds = true;
    return r;
  }
  r.ratio = r.norm_sum / r.norm_k;
  r.holds = r.norm_sum >= 0.5 * r.norm_k - tol;
  return r;
}

GapReport perturbation_gap_check(const OperatorMatrix& k, const OperatorMatrix& t0, const OperatorMatrix& a,
                                 const OperatorMatrix& b, double tol, const NormOptions& norm) {
  if (a.dim() != t0.dim() || b.dim() != t0.dim()) throw InvalidInput("A, B must match T0");
  const double resid = operator_norm(Matrix(a.entries() * t0.entries() * b.entries() - t0.entries()), norm);
  return perturbation_gap_check(k, t0, resid, tol, norm);
}

} // namespace opseq
