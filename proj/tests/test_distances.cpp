#include <doctest.h>

#include <random>

#include "opseq/distances.hpp"
#include "oracles.hpp"

using namespace opseq;

namespace {

OperatorMatrix diag(std::initializer_list<cplx> d) {
  Vector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (auto z : d) v(i++) = z;
  return OperatorMatrix(Matrix(v.asDiagonal()));
}

TrigSymbol theta_bar_z(const BlaschkeSpec& th, int m = 1) {
  return symbol_mul(symbol_conj_reflect(blaschke_symbol(th)), monomial(m));
}

TrigSymbol random_poly(std::mt19937_64& rng, int lo, int hi) {
  std::normal_distribution<double> g;
  TrigSymbol::CoeffMap m;
  for (int k = lo; k <= hi; ++k) m[k] = cplx{g(rng), g(rng)};
  return TrigSymbol(std::move(m), 0, 0.0);
}

} // namespace

TEST_CASE("dist_hinf") {
  CHECK(dist_hinf(monomial(-1), 4) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(dist_hinf(trig_from_coeffs({{0, 3.0}, {5, 1.0}}), 4) == 0.0);

  const auto sym = theta_bar_z({{0.5}});
  CHECK(std::abs(dist_hinf(sym, 64) - 0.5) <= 1e-12);
  CHECK(hankel_tail_bound(sym, 64) <= 1e-12);

  CHECK_THROWS_AS(dist_hinf(monomial(-5), 3), InvalidInput);
  CHECK_THROWS_AS(dist_hinf(monomial(-1), 0), InvalidInput);

  // independent oracle: full SVD of the Hankel block
  const auto phi = trig_from_coeffs({{-3, cplx{0.2, 0.1}}, {-2, -1.0}, {-1, 0.5}, {2, 4.0}});
  CHECK(std::abs(dist_hinf(phi, 8) - oracle::svd_norm(hankel_matrix(phi, 8).entries())) <= 1e-12);
}

TEST_CASE("dist_hinf_plus_c") {
  SUBCASE("theta-bar z with a zero at 1/2 decays geometrically") {
    const auto tr = dist_hinf_plus_c(theta_bar_z({{0.5}}), 64, 20);
    for (const auto& [n, d] : tr.per_n) CHECK(std::abs(d - std::ldexp(1.0, -(n + 1))) <= 1e-12);
    CHECK(tr.monotone_violation <= 1e-10);
    CHECK(tr.limit_estimate <= 1e-6);
    CHECK_FALSE(tr.slow_decay);
  }
  SUBCASE("conj(z) is continuous") {
    const auto tr = dist_hinf_plus_c(monomial(-1), 4, 5);
    CHECK(tr.per_n[0].second == doctest::Approx(1.0));
    for (std::size_t i = 1; i < tr.per_n.size(); ++i) CHECK(tr.per_n[i].second == 0.0);
  }
  SUBCASE("analytic symbols stay at zero") {
    const auto tr = dist_hinf_plus_c(trig_from_coeffs({{0, 1.0}, {1, 2.0}}), 4, 5);
    for (const auto& p : tr.per_n) CHECK(p.second == 0.0);
  }
  SUBCASE("a flat tail is flagged as slow decay") {
    // truncated symbol whose Hankel never leaves the window: the trace cannot certify its limit
    TrigSymbol::CoeffMap m;
    for (int k = -60; k <= -1; ++k) m[k] = 0.9;
    const auto tr = dist_hinf_plus_c(TrigSymbol(std::move(m), 200, 0.0), 64, 3);
    CHECK(tr.slow_decay == (tr.per_n[1].second - tr.per_n[3].second < 1e-3));
  }
  CHECK_THROWS_AS(dist_hinf_plus_c(monomial(-1), 4, 0), InvalidInput);
}

TEST_CASE("hartman_sarason_report") {
  SUBCASE("theta = z^2, f = z") {
    const auto r = hartman_sarason_report({{0.0, 0.0}}, monomial(1), 6);
    CHECK(r.model_norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.nehari_norm == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t n = 1; n < r.model_chain.size(); ++n) {
      CHECK(r.model_chain[n] <= 1e-12);
      CHECK(r.hankel_chain[n] <= 1e-12);
    }
    CHECK(r.finite_rank_limit_ok);
  }
  SUBCASE("single zero at 1/2, f = z, both paths geometric") {
    const auto r = hartman_sarason_report({{0.5}}, monomial(1), 20);
    for (std::size_t n = 0; n < r.model_chain.size(); ++n) {
      const double ref = std::ldexp(1.0, -static_cast<int>(n + 1));
      CHECK(std::abs(r.model_chain[n] - ref) <= 1e-8);
      CHECK(std::abs(r.hankel_chain[n] - ref) <= 1e-8);
    }
    CHECK(r.max_discrepancy <= 1e-8);
    CHECK(r.finite_rank_limit_ok);
  }
  SUBCASE("theta = z, f = 1") {
    const auto r = hartman_sarason_report({{0.0}}, monomial(0), 3);
    CHECK(r.model_norm == doctest::Approx(1.0));
    CHECK(r.nehari_norm == doctest::Approx(1.0));
    CHECK(r.finite_rank_limit_ok);
  }
  CHECK_THROWS_AS(hartman_sarason_report({{0.5}}, monomial(-1), 3), InvalidInput);
  CHECK_THROWS_AS(hartman_sarason_report({{}}, monomial(0), 3), InvalidInput);
}

TEST_CASE("sigma_u_estimate") {
  SUBCASE("zeros accumulating at 1") {
    BlaschkeSpec th;
    for (int j = 1; j <= 10; ++j) th.zeros.push_back(1.0 - std::ldexp(1.0, -j));
    const auto r = sigma_u_estimate(th);
    REQUIRE(r.flagged_points.size() == 1);
    CHECK(r.flagged_points[0] == cplx{1.0, 0.0});
    CHECK(r.m0 == 8);
  }
  SUBCASE("finite products of low degree flag nothing") {
    CHECK(sigma_u_estimate({{0.5}}).flagged_points.empty());
    CHECK(sigma_u_estimate({{0.0, 0.0, 0.0, 0.0}}).flagged_points.empty());
  }
  SUBCASE("report layout") {
    const auto r = sigma_u_estimate({{0.5}}, 16, 20);
    CHECK(r.grid.size() == 16);
    CHECK(r.radii.size() == 20);
    CHECK(r.radial_profile.size() == 16);
    CHECK(r.radial_profile[0].size() == 20);
    CHECK(r.radii[0] == 0.5);
    // z^4 profile is r^4 exactly
    const auto z4 = sigma_u_estimate({{0.0, 0.0, 0.0, 0.0}}, 8, 12);
    for (std::size_t m = 0; m < 12; ++m) CHECK(std::abs(z4.radial_profile[3][m] - std::pow(z4.radii[m], 4)) <= 1e-15);
  }
  CHECK_THROWS_AS(sigma_u_estimate({{0.5}}, 16, 2), InvalidInput);
}

TEST_CASE("peripheral_sup_check") {
  const auto p = trig_from_coeffs({{0, -1.0}, {1, 1.0}});
  SUBCASE("diag(1, i, 1/2) with p = z - 1") {
    const auto r = peripheral_sup_check(diag({1.0, cplx{0.0, 1.0}, 0.5}), p, 30);
    for (double v : r.trace) CHECK(std::abs(v - std::sqrt(2.0)) <= 1e-12);
    CHECK(std::abs(r.peripheral_sup - std::sqrt(2.0)) <= 1e-15);
    CHECK(r.discrepancy <= 1e-12);
    CHECK(r.peripheral_spectrum.size() == 2);
  }
  SUBCASE("diag(1, 0.3) with p = z - 1") {
    const auto r = peripheral_sup_check(diag({1.0, 0.3}), p, 30);
    CHECK(r.peripheral_sup == 0.0);
    for (std::size_t n = 0; n < r.trace.size(); ++n)
      CHECK(std::abs(r.trace[n] - 0.7 * std::pow(0.3, static_cast<double>(n))) <= 1e-14);
  }
  SUBCASE("shift path: trace constant at the sup norm") {
    const auto q = trig_from_coeffs({{0, 1.0}, {1, 1.0}, {2, -0.2}});
    const auto r = peripheral_sup_check_shift(q, 128, 16);
    const double sup = oracle::grid_max([&](cplx z) { return q(z); }, 1 << 16);
    for (double v : r.trace) CHECK(std::abs(v - r.trace.front()) <= 1e-12);
    CHECK(std::abs(r.limit_estimate - sup) <= 1e-6);
    CHECK(r.peripheral_spectrum.empty());
  }
  Matrix nd = Matrix::Identity(2, 2);
  nd(0, 1) = 0.1;
  CHECK_THROWS_AS(peripheral_sup_check(OperatorMatrix(nd), p, 3), InvalidInput);
  CHECK_THROWS_AS(peripheral_sup_check(diag({1.0}), monomial(-1), 3), InvalidInput);
}

TEST_CASE("property: distance traces are monotone and sandwiched") {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 15; ++t) {
    const auto phi = random_poly(rng, -8, 3);
    const auto tr = dist_hinf_plus_c(phi, 8, 10);
    CHECK(tr.monotone_violation <= 1e-10);
    const double top = dist_hinf(phi, 8);
    for (const auto& p : tr.per_n) {
      CHECK(p.second >= 0.0);
      CHECK(p.second <= top + 1e-10);
      CHECK(p.second >= tr.limit_estimate - 1e-10);
    }
  }
}

TEST_CASE("property: dist_hinf ignores analytic additions") {
  std::mt19937_64 rng(52);
  for (int t = 0; t < 15; ++t) {
    const auto phi = random_poly(rng, -6, 2);
    const auto h = random_poly(rng, 0, 5);
    CHECK(dist_hinf(symbol_add(phi, h), 6) == dist_hinf(phi, 6));
  }
}

TEST_CASE("property: dual paths agree for random finite Blaschke products") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 6; ++t) {
    BlaschkeSpec th;
    for (int j = 0; j < 1 + t % 3; ++j)
      th.zeros.push_back(std::polar(0.7 * std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng)));
    const auto r = hartman_sarason_report(th, trig_from_coeffs({{0, 0.3}, {2, 1.0}}), 8);
    CHECK(r.max_discrepancy <= 1e-8);
  }
}
