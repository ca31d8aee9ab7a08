#include "opseq/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace opseq {

bool atom_at_one(cplx z) { return std::abs(z - 1.0) <= kAtomAtOneTol; }
bool atom_on_circle(cplx z) { return std::abs(std::abs(z) - 1.0) <= kOnCircleTol; }

namespace {

void require_aligned(const MeasureAtoms& atoms, const VectorOnAtoms& x) {
  if (static_cast<Eigen::Index>(atoms.size()) != x.values.size())
    throw InvalidInput("vector length must match the atom count");
  if (!x.values.allFinite()) throw InvalidInput("vector has non-finite entries");
}

void require_contraction(const MeasureAtoms& atoms) {
  for (std::size_t j = 0; j < atoms.size(); ++j)
    if (std::abs(atoms.atoms[j].z) > 1.0 + kOnCircleTol)
      throw InvalidInput("atom " + std::to_string(j) + " lies outside the closed unit disk");
}

Vector locations(const MeasureAtoms& atoms) {
  Vector z(static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t j = 0; j < atoms.size(); ++j) z(static_cast<Eigen::Index>(j)) = atoms.atoms[j].z;
  return z;
}

Vector project_on_one(const MeasureAtoms& atoms, const Vector& x) {
  Vector out = Vector::Zero(x.size());
  for (std::size_t j = 0; j < atoms.size(); ++j)
    if (atom_at_one(atoms.atoms[j].z)) out(static_cast<Eigen::Index>(j)) = x(static_cast<Eigen::Index>(j));
  return out;
}

} // namespace

MeasureAtoms mu_from_atoms(const MeasureAtoms& atoms, const VectorOnAtoms& x) {
  require_aligned(atoms, x);
  MeasureAtoms mu;
  for (std::size_t j = 0; j < atoms.size(); ++j)
    mu.atoms.push_back({atoms.atoms[j].z, std::norm(x.values(static_cast<Eigen::Index>(j)))});
  return mu;
}

CesaroLimit cesaro_limit_atoms(const MeasureAtoms& atoms, const VectorOnAtoms& x) {
  require_aligned(atoms, x);
  require_contraction(atoms);
  CesaroLimit r;
  r.limit.values = project_on_one(atoms, x.values);

  const Vector z = locations(atoms);
  Vector orbit = x.values;
  Vector sum = Vector::Zero(x.values.size());
  for (std::size_t i = 0; i < kExplicitIterationCap; ++i) {
    sum += orbit;
    orbit = orbit.cwiseProduct(z);
  }
  r.checked_n = kExplicitIterationCap;
  r.crosscheck_gap = (sum / static_cast<double>(kExplicitIterationCap) - r.limit.values).norm();
  return r;
}

PowerVerdict power_convergence_verdict(const MeasureAtoms& atoms, const VectorOnAtoms& x, double tol) {
  require_aligned(atoms, x);
  require_contraction(atoms);
  PowerVerdict v;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const cplx z = atoms.atoms[j].z;
    if (atom_at_one(z)) {
      if (z != cplx{1.0, 0.0}) v.merged_atoms.push_back(j);
    } else if (atom_on_circle(z)) {
      v.circle_weight += std::norm(x.values(static_cast<Eigen::Index>(j)));
    }
  }
  v.converges = v.circle_weight <= tol;
  v.limit.values = project_on_one(atoms, x.values);

  // explicit N^n x with early exit once successive iterates agree to tol/10
  Vector z = locations(atoms);
  for (auto j : v.merged_atoms) z(static_cast<Eigen::Index>(j)) = 1.0;
  Vector orbit = x.values;
  bool settled = false;
  for (std::size_t n = 0; n < kExplicitIterationCap; ++n) {
    Vector next = orbit.cwiseProduct(z);
    const double step = (next - orbit).norm();
    orbit = std::move(next);
    v.iterations = n + 1;
    if (step <= tol / 10.0) {
      settled = true;
      break;
    }
  }
  const double scale = std::max(1.0, x.values.norm());
  v.iteration_agrees = v.converges ? settled && (orbit - v.limit.values).norm() <= 1e-8 * scale : !settled;
  return v;
}

LocalSpectrumReport local_spectrum_support(const MeasureAtoms& atoms, const VectorOnAtoms& x, double tol) {
  require_aligned(atoms, x);
  LocalSpectrumReport r;
  for (std::size_t j = 0; j < atoms.size(); ++j)
    if (std::norm(x.values(static_cast<Eigen::Index>(j))) > tol) r.support.push_back(atoms.atoms[j].z);
  if (r.support.empty()) {
    r.orbit_bounded = true;
    return r;
  }

  // log ||N^n x||^2 = logsumexp_j (log|x_j|^2 + 2 n log|z_j|), kept in logs so
  // geometric growth cannot overflow
  std::vector<double> lx;
  std::vector<double> lz;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const double w = std::norm(x.values(static_cast<Eigen::Index>(j)));
    if (w == 0.0) continue;
    lx.push_back(std::log(w));
    lz.push_back(2.0 * std::log(std::abs(atoms.atoms[j].z)));
  }
  auto term = [&](std::size_t j, double n) { return n == 0.0 ? lx[j] : lx[j] + n * lz[j]; };
  auto log_norm_sq = [&](double n) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < lx.size(); ++j) hi = std::max(hi, term(j, n));
    if (!std::isfinite(hi)) return hi;
    double s = 0.0;
    for (std::size_t j = 0; j < lx.size(); ++j) s += std::exp(term(j, n) - hi);
    return hi + std::log(s);
  };
  const double base = log_norm_sq(0.0);
  double growth = 0.0;
  for (int n = 1; n <= 1000; ++n) growth = std::max(growth, 0.5 * (log_norm_sq(n) - base));
  r.log_growth = growth;
  r.orbit_bounded = growth <= 2e-9;
  if (r.orbit_bounded) {
    for (auto z : r.support)
      if (std::abs(z) > 1.0 + 1e-12) r.disk_inclusion_consistent = false;
  }
  return r;
}

} // namespace opseq
