#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "cex/orbit.hpp"
#include "test_util.hpp"

using namespace cex;

namespace {

template <class R>
Poly<R> poly(std::initializer_list<double> cs) {
  Poly<R> p;
  for (double c : cs) p.push_back(Complex<R>(R(c), R(0)));
  return p;
}

// f_a(z) = 1 + a - 2/z^2, the reference family used throughout.
template <class R>
RationalMap<R> lattes_like(double a) {
  return RationalMap<R>(poly<R>({-2.0, 0.0, 1.0 + a}), poly<R>({0.0, 0.0, 1.0}));
}

}  // namespace

TEST_CASE("orbit of the finite critical point is exact for the base map") {
  auto f = lattes_like<double>(0.0);
  auto tr = iterate_orbit(f, SpherePoint<double>::affine(Complex<double>(0.0, 0.0)), 4);

  REQUIRE(tr.points.size() == 5);
  REQUIRE(tr.certified_horizon == 4);
  REQUIRE(!tr.precision_exhausted);

  CHECK(tr.points[0].affine_value().re == 0.0);
  CHECK(tr.points[1].at_infinity());
  CHECK(tr.points[2].affine_value().re == 1.0);
  CHECK(tr.points[3].affine_value().re == -1.0);
  CHECK(tr.points[4].affine_value().re == -1.0);
  for (const auto& p : tr.points) {
    if (!p.at_infinity()) CHECK(p.affine_value().im == 0.0);
  }

  // The start point is critical, so the very first ledger step is -inf.
  CHECK(tr.ledger[0] == 0.0);
  CHECK(tr.ledger[1] == -std::numeric_limits<double>::infinity());
}

TEST_CASE("ledger along the critical value orbit gives log 4 per step") {
  auto f = lattes_like<double>(0.0);
  auto tr = iterate_orbit(f, SpherePoint<double>::affine(Complex<double>(1.0, 0.0)), 200);

  REQUIRE(tr.certified_horizon == 200);
  const double log4 = std::log(4.0);
  const double log64 = std::log(64.0);
  CHECK(std::abs(tr.ledger[3] - log64) < 1e-12);

  auto est = lyapunov_estimates(tr);
  CHECK(est.lower <= est.upper);
  CHECK(std::abs(est.lower - log4) < 1e-6);
  CHECK(std::abs(est.upper - log4) < 1e-6);
}

TEST_CASE("zero length orbit is a single certified point") {
  auto f = lattes_like<double>(0.0);
  auto tr = iterate_orbit(f, SpherePoint<double>::affine(Complex<double>(0.3, 0.1)), 0);
  REQUIRE(tr.points.size() == 1);
  REQUIRE(tr.ledger.size() == 1);
  CHECK(tr.ledger[0] == 0.0);
  CHECK(tr.certified_horizon == 0);
  CHECK(!tr.precision_exhausted);
  CHECK_THROWS_AS(lyapunov_estimates(tr), std::invalid_argument);
}

TEST_CASE("exactly linear ledger pins both estimates to the slope") {
  OrbitTrace<double> tr;
  const double gamma = 0.75;  // dyadic so k * gamma / k is exact
  for (int k = 0; k <= 40; ++k) {
    tr.points.push_back(SpherePoint<double>::zero());
    tr.ledger.push_back(gamma * k);
  }
  tr.certified_horizon = 40;
  auto est = lyapunov_estimates(tr);
  CHECK(est.lower == gamma);
  CHECK(est.upper == gamma);
}

TEST_CASE("ledger is additive along suborbits") {
  // z^2 - 2 is chaotic on [-2, 2]; restarting mid-orbit must reproduce the
  // ledger differences exactly (same floats in, same floats out).
  RationalMap<double> f(poly<double>({-2.0, 0.0, 1.0}), poly<double>({1.0}));
  auto tr = iterate_orbit(f, SpherePoint<double>::affine(Complex<double>(0.5, 0.0)), 24);
  REQUIRE(tr.certified_horizon == 24);

  auto sub = iterate_orbit(f, tr.points[10], 14);
  REQUIRE(sub.certified_horizon == 14);
  for (int k = 0; k <= 14; ++k) {
    CHECK(std::abs((tr.ledger[10 + k] - tr.ledger[10]) - sub.ledger[k]) < 1e-12);
    CHECK(chordal(tr.points[10 + k], sub.points[k]) == 0.0);
  }
}

TEST_CASE("certification horizon grows with the precision lane") {
  // Chaotic orbit: the double lane loses 1e-6 agreement with its shadow
  // around step 30, the 128-bit lane much later.
  Poly<double> nd = poly<double>({-2.0, 0.0, 1.0});
  Poly<double> dd = poly<double>({1.0});
  RationalMap<double> fd(nd, dd);
  auto start_d = SpherePoint<double>::affine(Complex<double>(0.5, 0.0));
  auto tr_d = iterate_orbit(fd, start_d, 400);
  CHECK(tr_d.precision_exhausted);
  CHECK(tr_d.certified_horizon >= 10);
  CHECK(tr_d.certified_horizon <= 80);
  CHECK(tr_d.points.size() == static_cast<size_t>(tr_d.certified_horizon) + 1);

  RationalMap<R128> f1 = convert_map<R128>(fd);
  auto tr_1 = iterate_orbit(f1, SpherePoint<R128>::affine(Complex<R128>(R128(0.5), R128(0))), 400);
  CHECK(tr_1.precision_exhausted);
  CHECK(tr_1.certified_horizon > tr_d.certified_horizon);
}

TEST_CASE("fixed critical point at infinity stays exact") {
  RationalMap<double> f(poly<double>({0.0, 0.0, 1.0}), poly<double>({1.0}));
  auto tr = iterate_orbit(f, SpherePoint<double>::infinity(), 5);
  REQUIRE(tr.certified_horizon == 5);
  for (const auto& p : tr.points) CHECK(p.at_infinity());
}
