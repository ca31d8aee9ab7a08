#pragma once

///
/// \file operators.hpp
///
/// Finite matrix realizations of Hardy-space and normal operators, plus the
/// spectral-norm kernel every experiment goes through.
///
/// Index conventions (Fourier coefficients phi_k of the symbol):
///   Toeplitz   (i, j) -> phi_{i-j}
///   Hankel     (i, j) -> phi_{-(i+j+1)}
///   Composition column k -> Taylor coefficients of phi^k
///

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "opseq/atoms.hpp"
#include "opseq/symbols.hpp"
#include "opseq/types.hpp"

namespace opseq {

struct HardyTruncation {};
struct ModelSpaceBasis {
  BlaschkeSpec theta;
};
struct AtomicBasis {
  MeasureAtoms atoms;
};
using BasisTag = std::variant<HardyTruncation, ModelSpaceBasis, AtomicBasis>;

std::string basis_name(const BasisTag& tag);

/// Dense complex square matrix with the basis it is written in.
class OperatorMatrix {
public:
  OperatorMatrix() = default;
  explicit OperatorMatrix(Matrix entries, BasisTag basis = HardyTruncation{}, std::string meta = {});

  Eigen::Index dim() const noexcept { return entries_.rows(); }
  const Matrix& entries() const noexcept { return entries_; }
  const BasisTag& basis() const noexcept { return basis_; }
  const std::string& meta() const noexcept { return meta_; }

  cplx operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

private:
  Matrix entries_;
  BasisTag basis_;
  std::string meta_;
};

/// Orthonormal Takenaka-Malmquist basis of the model space of a finite
/// Blaschke product, stored as truncated Taylor coefficients.
struct ModelBasis {
  BlaschkeSpec theta;
  Matrix coeff_matrix; ///< (order+1) x degree
  double ortho_residual = 0.0;
  double tail_bound = 0.0;

  Eigen::Index degree() const noexcept { return coeff_matrix.cols(); }
  Eigen::Index order() const noexcept { return coeff_matrix.rows() - 1; }
};

OperatorMatrix toeplitz_matrix(const TrigSymbol& phi, Eigen::Index n);
OperatorMatrix hankel_matrix(const TrigSymbol& phi, Eigen::Index n);
OperatorMatrix composition_matrix(const TrigSymbol& phi, Eigen::Index n);

inline constexpr double kModelTailTol = 1e-12;

/// Throws InvalidInput carrying the required order when the certified tail
/// of some basis column exceeds kModelTailTol at `order`.
ModelBasis tm_basis(const BlaschkeSpec& theta, int order);
/// Order at which every basis column has certified tail below `tol`.
int tm_required_order(const BlaschkeSpec& theta, double tol = kModelTailTol);

/// f(S_theta) = P_theta T_f restricted to the model space, in the TM basis.
OperatorMatrix model_compression(const ModelBasis& basis, const TrigSymbol& f);

OperatorMatrix rank_one_matrix(const Vector& x, const Vector& y);
OperatorMatrix diagonal_from_atoms(const MeasureAtoms& atoms);

Vector basis_vector(Eigen::Index dim, Eigen::Index k);
OperatorMatrix identity_matrix(Eigen::Index n, cplx scale = 1.0);
/// Truncated forward shift S (ones on the subdiagonal).
OperatorMatrix shift_matrix(Eigen::Index n);
/// Copies `op` into the leading block of a zero matrix of size `dim`.
OperatorMatrix embed(const OperatorMatrix& op, Eigen::Index dim);

// --- spectral norm -------------------------------------------------------

struct NormOptions {
  double rel_tol = 1e-10;
  int max_iter = 5000;
  std::uint64_t seed = 0x5EED;
};

struct NormResult {
  double value = 0.0;
  double residual = 0.0; ///< ||G y - theta y|| for the top Ritz pair of G = T*T
  int iterations = 0;
};

/// Raised when the norm iteration exhausts max_iter; carries the best estimate.
class NormNotConverged : public std::runtime_error {
public:
  NormNotConverged(double estimate, double residual, int iterations);
  double estimate;
  double residual;
  int iterations;
};

/// Largest singular value.  Power iteration on T*T from a seeded start
/// vector, with the iterates kept orthonormal (Lanczos) so the top Ritz
/// value is extracted from the whole power sequence.  Stops once the Ritz
/// residual is below rel_tol * theta or the Krylov space is invariant.
NormResult norm_report(const Matrix& t, const NormOptions& opts = {});
double operator_norm(const Matrix& t, const NormOptions& opts = {});
double operator_norm(const OperatorMatrix& t, const NormOptions& opts = {});

} // namespace opseq
