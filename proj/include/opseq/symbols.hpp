#pragma once

///
/// \file symbols.hpp
///
/// Fourier-coefficient algebra for functions on the unit circle.
///
/// A symbol is a finitely supported map k -> c_k standing for
/// phi(e^{it}) = sum_k c_k e^{ikt}.  Symbols produced by truncating an
/// infinite expansion carry a certified bound on the l1 mass of the dropped
/// coefficients (`tail_bound`); exact trigonometric polynomials have 0.
///

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "opseq/types.hpp"

namespace opseq {

class TrigSymbol {
public:
  using CoeffMap = std::map<int, cplx>;

  TrigSymbol() = default;
  TrigSymbol(CoeffMap coeffs, int truncation_order, double tail_bound);

  const CoeffMap& coeffs() const noexcept { return coeffs_; }
  cplx coeff(int k) const;

  int truncation_order() const noexcept { return order_; }
  double tail_bound() const noexcept { return tail_bound_; }
  bool is_exact() const noexcept { return tail_bound_ == 0.0; }

  bool is_zero() const noexcept { return coeffs_.empty(); }
  /// Smallest / largest stored index; both 0 for the zero symbol.
  int min_index() const noexcept;
  int max_index() const noexcept;
  /// No stored coefficient at a negative index.
  bool is_analytic() const noexcept;
  /// Number of strictly negative indices spanned, i.e. max(0, -min_index()).
  int negative_extent() const noexcept;

  /// Evaluates the Laurent sum at a point (typically on the circle).
  cplx operator()(cplx z) const;

  /// l1 norm of the stored coefficients.
  double l1_norm() const;

private:
  CoeffMap coeffs_;
  int order_ = 0;
  double tail_bound_ = 0.0;
};

/// Zeros of a finite Blaschke product, repeated according to multiplicity.
struct BlaschkeSpec {
  std::vector<cplx> zeros;

  std::size_t degree() const noexcept { return zeros.size(); }
  double max_modulus() const;
  /// Direct product evaluation of prod_j (a_j - z)/(1 - conj(a_j) z).
  cplx evaluate(cplx z) const;
  /// Throws InvalidInput unless every |a_j| < 1.
  void validate() const;
};

inline constexpr int kDefaultBlaschkeOrder = 1024;
inline constexpr std::size_t kDefaultSupGrid = 8192;

TrigSymbol trig_from_coeffs(std::span<const std::pair<int, cplx>> entries);
TrigSymbol trig_from_coeffs(std::initializer_list<std::pair<int, cplx>> entries);
TrigSymbol monomial(int k, cplx c = 1.0);

/// Taylor coefficients 0..order of the Blaschke product with factor
/// (a - z)/(1 - conj(a) z).
TrigSymbol blaschke_symbol(const BlaschkeSpec& spec, int order = kDefaultBlaschkeOrder);

/// Certified bound on sum_{k > order} |c_k| for
/// prefactor(z) * prod_j b_{a_j}(z), where the prefactor is analytic in
/// |z| < 1/|pole| with the supplied modulus bound.  Used by both the Blaschke
/// expansion and the Takenaka-Malmquist basis.
double blaschke_tail_bound(const BlaschkeSpec& spec, int order, double pole = 0.0,
                           double prefactor_scale = 1.0);

/// Smallest order whose certified tail bound is below `tol`.
int blaschke_required_order(const BlaschkeSpec& spec, double tol, double pole = 0.0,
                            double prefactor_scale = 1.0);

TrigSymbol symbol_add(const TrigSymbol& a, const TrigSymbol& b);
TrigSymbol symbol_scale(const TrigSymbol& a, cplx s);
TrigSymbol symbol_mul(const TrigSymbol& a, const TrigSymbol& b);
/// phi -> conj(phi) on the circle: index k maps to -k with conjugated value.
TrigSymbol symbol_conj_reflect(const TrigSymbol& a);
/// Multiplication by z^n.
TrigSymbol symbol_rotate(const TrigSymbol& a, int n);

/// max_m |phi(e^{2 pi i m / G})|.  A lower bound for the sup norm; the grid
/// must satisfy G >= 4 * (max_index - min_index).
double sup_norm_grid(const TrigSymbol& a, std::size_t grid_size = kDefaultSupGrid);

} // namespace opseq
