#pragma once

#include <vector>

#include "opseq/types.hpp"

namespace opseq {

/// Atomic spectral model: a normal operator acting diagonally on
/// L^2 of finitely many point masses.
struct Atom {
  cplx z;
  double weight = 0.0;
};

struct MeasureAtoms {
  std::vector<Atom> atoms;

  std::size_t size() const noexcept { return atoms.size(); }
  /// Locations carrying positive weight.
  std::vector<cplx> closed_support() const;
  double total_mass() const;
  std::vector<cplx> locations() const;

  static MeasureAtoms from_locations(std::vector<cplx> z, double weight = 1.0);
};

} // namespace opseq
