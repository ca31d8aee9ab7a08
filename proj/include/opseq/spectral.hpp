#pragma once

///
/// \file spectral.hpp
///
/// Experiments on a normal contraction N = diag(z_j) acting on a vector x,
/// through the scalar spectral measure mu_x = sum_j |x_j|^2 delta_{z_j}.
///

#include <cstddef>
#include <string>
#include <vector>

#include "opseq/atoms.hpp"
#include "opseq/types.hpp"

namespace opseq {

/// Vector expressed in the atom basis (x_j sits on atom j).
struct VectorOnAtoms {
  Vector values;
};

inline constexpr double kAtomAtOneTol = 1e-14;
inline constexpr double kOnCircleTol = 1e-14;
inline constexpr std::size_t kExplicitIterationCap = 10000;

bool atom_at_one(cplx z);
bool atom_on_circle(cplx z);

MeasureAtoms mu_from_atoms(const MeasureAtoms& atoms, const VectorOnAtoms& x);

struct CesaroLimit {
  VectorOnAtoms limit; ///< P({1}) x
  std::size_t checked_n = 0;
  double crosscheck_gap = 0.0; ///< ||(1/n) sum_{i<n} N^i x - P({1}) x|| at checked_n
};

CesaroLimit cesaro_limit_atoms(const MeasureAtoms& atoms, const VectorOnAtoms& x);

struct PowerVerdict {
  bool converges = false;
  double circle_weight = 0.0; ///< mu_x of the circle minus {1}
  VectorOnAtoms limit;
  std::size_t iterations = 0;   ///< explicit iteration length used for the cross-check
  bool iteration_agrees = false; ///< explicit N^n x behaved as the verdict says
  std::vector<std::size_t> merged_atoms; ///< atoms within tolerance of 1, treated as 1
};

PowerVerdict power_convergence_verdict(const MeasureAtoms& atoms, const VectorOnAtoms& x, double tol = 1e-12);

struct LocalSpectrumReport {
  std::vector<cplx> support;
  bool orbit_bounded = false;
  double log_growth = 0.0; ///< log(max_{n <= 1000} ||N^n x|| / ||x||)
  bool disk_inclusion_consistent = true; ///< bounded orbit => support in the closed disk
};

LocalSpectrumReport local_spectrum_support(const MeasureAtoms& atoms, const VectorOnAtoms& x, double tol = 0.0);

} // namespace opseq
