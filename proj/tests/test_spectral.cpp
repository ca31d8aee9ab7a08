#include <doctest.h>

#include <random>

#include "opseq/asymptotics.hpp"
#include "opseq/spectral.hpp"

using namespace opseq;

namespace {

VectorOnAtoms vec(std::initializer_list<cplx> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (auto z : v) x(i++) = z;
  return {x};
}

constexpr cplx I{0.0, 1.0};

} // namespace

TEST_CASE("mu_from_atoms") {
  const double s = 1.0 / std::sqrt(2.0);
  const auto mu = mu_from_atoms(MeasureAtoms::from_locations({1.0, I}), vec({s, s}));
  CHECK(std::abs(mu.atoms[0].weight - 0.5) <= 1e-15);
  CHECK(std::abs(mu.atoms[1].weight - 0.5) <= 1e-15);

  const auto zero = mu_from_atoms(MeasureAtoms::from_locations({1.0, I}), vec({0.0, 0.0}));
  CHECK(zero.total_mass() == 0.0);

  const auto w = mu_from_atoms(MeasureAtoms::from_locations({1.0, I, -1.0}), vec({1.0, 0.0, 2.0}));
  CHECK(w.atoms[0].weight == 1.0);
  CHECK(w.atoms[1].weight == 0.0);
  CHECK(w.atoms[2].weight == 4.0);

  CHECK_THROWS_AS(mu_from_atoms(MeasureAtoms::from_locations({1.0}), vec({1.0, 2.0})), InvalidInput);
}

TEST_CASE("cesaro_limit_atoms") {
  const double s = 1.0 / std::sqrt(3.0);
  const auto r = cesaro_limit_atoms(MeasureAtoms::from_locations({1.0, I, -1.0}), vec({s, s, s}));
  CHECK(std::abs(r.limit.values(0) - s) <= 1e-12);
  CHECK(std::abs(r.limit.values(1)) <= 1e-12);
  CHECK(std::abs(r.limit.values(2)) <= 1e-12);
  CHECK(r.checked_n == kExplicitIterationCap);
  CHECK(r.crosscheck_gap <= 1e-3);

  const auto none = cesaro_limit_atoms(MeasureAtoms::from_locations({0.5, I}), vec({1.0, 1.0}));
  CHECK(none.limit.values.norm() == 0.0);

  const auto one = cesaro_limit_atoms(MeasureAtoms::from_locations({1.0}), vec({cplx{0.3, -2.0}}));
  CHECK(one.limit.values(0) == cplx{0.3, -2.0});
  CHECK(one.crosscheck_gap <= 1e-12);

  CHECK_THROWS_AS(cesaro_limit_atoms(MeasureAtoms::from_locations({1.5}), vec({1.0})), InvalidInput);
}

TEST_CASE("power_convergence_verdict") {
  const cplx a{0.4, -1.1};
  const cplx b{2.0, 0.5};
  SUBCASE("atoms 1 and 1/2") {
    const auto v = power_convergence_verdict(MeasureAtoms::from_locations({1.0, 0.5}), vec({a, b}));
    CHECK(v.converges);
    CHECK(std::abs(v.limit.values(0) - a) <= 1e-12);
    CHECK(std::abs(v.limit.values(1)) <= 1e-12);
    CHECK(v.iteration_agrees);
  }
  SUBCASE("atoms 1 and -1 with weight on -1") {
    const auto v = power_convergence_verdict(MeasureAtoms::from_locations({1.0, -1.0}), vec({a, b}));
    CHECK_FALSE(v.converges);
    CHECK(std::abs(v.circle_weight - std::norm(b)) <= 1e-12);
    CHECK(v.iteration_agrees);
  }
  SUBCASE("atoms 1 and -1 with no weight on -1") {
    const auto v = power_convergence_verdict(MeasureAtoms::from_locations({1.0, -1.0}), vec({a, 0.0}));
    CHECK(v.converges);
    CHECK(std::abs(v.limit.values(0) - a) <= 1e-12);
    CHECK(v.limit.values(1) == cplx{});
    CHECK(v.iteration_agrees);
  }
  SUBCASE("atoms within tolerance of 1 are merged") {
    const auto v = power_convergence_verdict(MeasureAtoms::from_locations({cplx{1.0, 5e-15}}), vec({1.0}));
    CHECK(v.converges);
    CHECK(v.merged_atoms.size() == 1);
  }
}

TEST_CASE("local_spectrum_support") {
  SUBCASE("zero-weight atom outside the disk is excluded") {
    const auto r = local_spectrum_support(MeasureAtoms::from_locations({1.0, I, 2.0}), vec({1.0, 1.0, 0.0}));
    REQUIRE(r.support.size() == 2);
    CHECK(r.support[0] == cplx{1.0, 0.0});
    CHECK(r.support[1] == I);
    CHECK(r.orbit_bounded);
    CHECK(r.disk_inclusion_consistent);
  }
  SUBCASE("weight at 2 grows geometrically") {
    const auto r = local_spectrum_support(MeasureAtoms::from_locations({1.0, 2.0}), vec({1.0, 1e-6}));
    CHECK_FALSE(r.orbit_bounded);
    CHECK(r.log_growth > 600.0);
    CHECK(r.disk_inclusion_consistent);
  }
  SUBCASE("zero vector") {
    const auto r = local_spectrum_support(MeasureAtoms::from_locations({1.0, 0.0}), vec({0.0, 0.0}));
    CHECK(r.support.empty());
    CHECK(r.orbit_bounded);
  }
  SUBCASE("atom at the origin") {
    const auto r = local_spectrum_support(MeasureAtoms::from_locations({0.0, 0.5}), vec({1.0, 1.0}));
    CHECK(r.orbit_bounded);
    CHECK(r.support.size() == 2);
  }
}

namespace {

MeasureAtoms random_disk_atoms(std::mt19937_64& rng, std::size_t count, bool allow_circle) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MeasureAtoms atoms;
  for (std::size_t j = 0; j < count; ++j) {
    const double kind = u(rng);
    cplx z;
    if (kind < 0.2) z = 1.0;
    else if (allow_circle && kind < 0.5) z = std::polar(1.0, 2.0 * std::numbers::pi * u(rng));
    else z = std::polar(0.95 * std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng));
    atoms.atoms.push_back({z, 1.0});
  }
  return atoms;
}

VectorOnAtoms random_vec(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  Vector x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = cplx{g(rng), g(rng)};
  return {x};
}

} // namespace

TEST_CASE("property: mass conservation") {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 50; ++t) {
    const auto atoms = random_disk_atoms(rng, 6, true);
    const auto x = random_vec(rng, 6);
    CHECK(std::abs(mu_from_atoms(atoms, x).total_mass() - x.values.squaredNorm()) <=
          1e-14 * x.values.squaredNorm());
  }
}

TEST_CASE("property: converging powers share the Cesaro limit") {
  std::mt19937_64 rng(62);
  for (int t = 0; t < 50; ++t) {
    const auto atoms = random_disk_atoms(rng, 5, true);
    const auto x = random_vec(rng, 5);
    const auto v = power_convergence_verdict(atoms, x);
    CHECK(v.iteration_agrees);
    if (v.converges) CHECK((v.limit.values - cesaro_limit_atoms(atoms, x).limit.values).norm() <= 1e-12);
  }
}

TEST_CASE("property: averaged operators converge on the closed disk") {
  std::mt19937_64 rng(63);
  for (int t = 0; t < 20; ++t) {
    const auto atoms = random_disk_atoms(rng, 5, true);
    const auto x = random_vec(rng, 5);
    for (int k : {2, 3, 4}) {
      const Vector s = averaged_operator(diagonal_from_atoms(atoms), k).entries().diagonal();
      MeasureAtoms avg;
      for (Eigen::Index j = 0; j < s.size(); ++j) avg.atoms.push_back({s(j), 1.0});
      // atoms of S on the circle can only sit at 1
      for (const auto& at : avg.atoms)
        if (atom_on_circle(at.z)) CHECK(std::abs(at.z - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("property: increments vanish when circle weight sits at 1") {
  std::mt19937_64 rng(64);
  for (int t = 0; t < 20; ++t) {
    const auto atoms = random_disk_atoms(rng, 6, false);
    const auto x = random_vec(rng, 6);
    Vector z(6);
    for (Eigen::Index j = 0; j < 6; ++j) z(j) = atoms.atoms[static_cast<std::size_t>(j)].z;
    Vector orbit = x.values;
    for (int n = 0; n < 1000; ++n) orbit = orbit.cwiseProduct(z);
    CHECK((orbit.cwiseProduct(z) - orbit).norm() <= 1e-12);
  }
}
