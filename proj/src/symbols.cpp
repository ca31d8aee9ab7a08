#include "opseq/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

namespace opseq {

namespace {

void prune_zeros(TrigSymbol::CoeffMap& m) {
  std::erase_if(m, [](const auto& kv) { return kv.second == cplx{0.0, 0.0}; });
}

int support_order(const TrigSymbol::CoeffMap& m) {
  if (m.empty()) return 0;
  return std::max(std::abs(m.begin()->first), std::abs(m.rbegin()->first));
}

} // namespace

TrigSymbol::TrigSymbol(CoeffMap coeffs, int truncation_order, double tail_bound)
    : coeffs_(std::move(coeffs)), order_(truncation_order), tail_bound_(tail_bound) {
  for (const auto& [k, c] : coeffs_) {
    if (!is_finite(c)) throw InvalidInput("symbol coefficient at index " + std::to_string(k) + " is not finite");
  }
  if (!(tail_bound_ >= 0.0)) throw InvalidInput("tail bound must be nonnegative");
  prune_zeros(coeffs_);
  order_ = std::max(order_, support_order(coeffs_));
}

cplx TrigSymbol::coeff(int k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? cplx{} : it->second;
}

int TrigSymbol::min_index() const noexcept { return coeffs_.empty() ? 0 : coeffs_.begin()->first; }
int TrigSymbol::max_index() const noexcept { return coeffs_.empty() ? 0 : coeffs_.rbegin()->first; }
bool TrigSymbol::is_analytic() const noexcept { return min_index() >= 0; }
int TrigSymbol::negative_extent() const noexcept { return std::max(0, -min_index()); }

cplx TrigSymbol::operator()(cplx z) const {
  cplx s{};
  for (const auto& [k, c] : coeffs_) s += c * std::pow(z, k);
  return s;
}

double TrigSymbol::l1_norm() const {
  double s = 0.0;
  for (const auto& [k, c] : coeffs_) s += std::abs(c);
  return s;
}

double BlaschkeSpec::max_modulus() const {
  double r = 0.0;
  for (auto a : zeros) r = std::max(r, std::abs(a));
  return r;
}

cplx BlaschkeSpec::evaluate(cplx z) const {
  cplx v{1.0, 0.0};
  for (auto a : zeros) v *= (a - z) / (1.0 - std::conj(a) * z);
  return v;
}

void BlaschkeSpec::validate() const {
  for (std::size_t j = 0; j < zeros.size(); ++j) {
    if (!is_finite(zeros[j]) || !(std::abs(zeros[j]) < 1.0))
      throw InvalidInput("Blaschke zero " + std::to_string(j) + " must lie in the open unit disk");
  }
}

TrigSymbol trig_from_coeffs(std::span<const std::pair<int, cplx>> entries) {
  TrigSymbol::CoeffMap m;
  for (const auto& [k, c] : entries) {
    if (!is_finite(c)) throw InvalidInput("coefficient at index " + std::to_string(k) + " is not finite");
    if (!m.emplace(k, c).second) throw InvalidInput("duplicate coefficient index " + std::to_string(k));
  }
  return TrigSymbol(std::move(m), 0, 0.0);
}

TrigSymbol trig_from_coeffs(std::initializer_list<std::pair<int, cplx>> entries) {
  return trig_from_coeffs(std::span<const std::pair<int, cplx>>(entries.begin(), entries.size()));
}

TrigSymbol monomial(int k, cplx c) { return trig_from_coeffs({{k, c}}); }

double blaschke_tail_bound(const BlaschkeSpec& spec, int order, double pole, double prefactor_scale) {
  const double r = std::max(spec.max_modulus(), pole);
  if (r == 0.0) {
    // prefactor is constant and every factor is -z: an exact monomial
    return order >= static_cast<int>(spec.degree()) ? 0.0 : prefactor_scale;
  }
  if (r >= 1.0) return std::numeric_limits<double>::infinity();

  // Cauchy estimate on |z| = rho with 1 < rho < 1/r:
  //   |c_k| <= max_{|z|=rho} |F| / rho^k,  tail <= max|F| rho^{-(M+1)} / (1 - 1/rho).
  double best = std::numeric_limits<double>::infinity();
  constexpr int kSamples = 400;
  for (int s = 1; s < kSamples; ++s) {
    const double rho = 1.0 + (1.0 / r - 1.0) * s / kSamples;
    double log_bound = std::log(prefactor_scale);
    if (pole > 0.0) log_bound -= std::log1p(-pole * rho);
    for (auto a : spec.zeros) {
      const double m = std::abs(a);
      log_bound += std::log(m + rho) - std::log1p(-m * rho);
    }
    log_bound += -(order + 1.0) * std::log(rho) - std::log1p(-1.0 / rho);
    best = std::min(best, log_bound);
  }
  return std::exp(best);
}

int blaschke_required_order(const BlaschkeSpec& spec, double tol, double pole, double prefactor_scale) {
  int lo = static_cast<int>(spec.degree());
  if (blaschke_tail_bound(spec, lo, pole, prefactor_scale) <= tol) return lo;
  int hi = std::max(lo, 1) * 2;
  while (blaschke_tail_bound(spec, hi, pole, prefactor_scale) > tol) {
    if (hi > (1 << 24)) throw InvalidInput("Blaschke tail tolerance unreachable below order 2^24");
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (blaschke_tail_bound(spec, mid, pole, prefactor_scale) <= tol ? hi : lo) = mid;
  }
  return hi;
}

TrigSymbol blaschke_symbol(const BlaschkeSpec& spec, int order) {
  spec.validate();
  if (order < static_cast<int>(spec.degree()))
    throw InvalidInput("Blaschke truncation order must be at least the degree");

  const auto len = static_cast<std::size_t>(order) + 1;
  std::vector<cplx> acc(len, cplx{});
  acc[0] = 1.0;
  std::vector<cplx> factor(len);
  std::vector<cplx> next(len);
  for (auto a : spec.zeros) {
    // (a - z)/(1 - conj(a) z) = a + sum_{k>=1} conj(a)^{k-1} (|a|^2 - 1) z^k
    const cplx ab = std::conj(a);
    factor[0] = a;
    cplx p = std::norm(a) - 1.0;
    for (std::size_t k = 1; k < len; ++k) {
      factor[k] = p;
      p *= ab;
    }
    std::fill(next.begin(), next.end(), cplx{});
    for (std::size_t i = 0; i < len; ++i) {
      if (acc[i] == cplx{}) continue;
      for (std::size_t k = 0; i + k < len; ++k) next[i + k] += acc[i] * factor[k];
    }
    acc.swap(next);
  }

  TrigSymbol::CoeffMap m;
  for (std::size_t k = 0; k < len; ++k) m.emplace(static_cast<int>(k), acc[k]);
  return TrigSymbol(std::move(m), order, blaschke_tail_bound(spec, order));
}

TrigSymbol symbol_add(const TrigSymbol& a, const TrigSymbol& b) {
  auto m = a.coeffs();
  for (const auto& [k, c] : b.coeffs()) m[k] += c;
  return TrigSymbol(std::move(m), std::max(a.truncation_order(), b.truncation_order()),
                    a.tail_bound() + b.tail_bound());
}

TrigSymbol symbol_scale(const TrigSymbol& a, cplx s) {
  TrigSymbol::CoeffMap m;
  for (const auto& [k, c] : a.coeffs()) m.emplace(k, c * s);
  return TrigSymbol(std::move(m), a.truncation_order(), a.tail_bound() * std::abs(s));
}

TrigSymbol symbol_mul(const TrigSymbol& a, const TrigSymbol& b) {
  TrigSymbol::CoeffMap m;
  for (const auto& [i, x] : a.coeffs())
    for (const auto& [j, y] : b.coeffs()) m[i + j] += x * y;
  // (a + da)(b + db) - ab = a db + da b + da db, measured in l1
  const double ta = a.tail_bound();
  const double tb = b.tail_bound();
  const double tail = a.l1_norm() * tb + ta * b.l1_norm() + ta * tb;
  return TrigSymbol(std::move(m), a.truncation_order() + b.truncation_order(), tail);
}

TrigSymbol symbol_conj_reflect(const TrigSymbol& a) {
  TrigSymbol::CoeffMap m;
  for (const auto& [k, c] : a.coeffs()) m.emplace(-k, std::conj(c));
  return TrigSymbol(std::move(m), a.truncation_order(), a.tail_bound());
}

TrigSymbol symbol_rotate(const TrigSymbol& a, int n) {
  TrigSymbol::CoeffMap m;
  for (const auto& [k, c] : a.coeffs()) m.emplace(k + n, c);
  return TrigSymbol(std::move(m), 0, a.tail_bound());
}

double sup_norm_grid(const TrigSymbol& a, std::size_t grid_size) {
  const auto span = static_cast<std::size_t>(a.max_index() - a.min_index());
  if (grid_size < 4 * span || grid_size == 0)
    throw InvalidInput("sup-norm grid of size " + std::to_string(grid_size) +
                       " is too coarse for an index span of " + std::to_string(span));
  if (a.is_zero()) return 0.0;

  const auto g = static_cast<long long>(grid_size);
  std::vector<cplx> twiddle(grid_size);
  for (std::size_t m = 0; m < grid_size; ++m)
    twiddle[m] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(grid_size));

  double best = 0.0;
  for (long long m = 0; m < g; ++m) {
    cplx v{};
    for (const auto& [k, c] : a.coeffs()) {
      long long idx = (static_cast<long long>(k) * m) % g;
      if (idx < 0) idx += g;
      v += c * twiddle[static_cast<std::size_t>(idx)];
    }
    best = std::max(best, std::abs(v));
  }
  return best;
}

} // namespace opseq
