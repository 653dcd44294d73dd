#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "cex/scalar.hpp"
#include "cex/sphere.hpp"
#include "test_util.hpp"

using namespace cex;
using testutil::Rng;

namespace {
const double kSqrt2 = 1.4142135623730951;
}

TEST_CASE("chordal distance pinned values") {
  auto zero = SpherePoint<double>::zero();
  auto inf = SpherePoint<double>::infinity();
  auto one = SpherePoint<double>::affine(Complex<double>(1.0));
  auto minus_one = SpherePoint<double>::affine(Complex<double>(-1.0));
  auto eye = SpherePoint<double>::affine(Complex<double>(0.0, 1.0));

  // 0 and infinity are antipodal: the full diameter, exactly.
  CHECK(chordal(zero, inf) == 2.0);
  CHECK(chordal(one, minus_one) == 2.0);  // also antipodal

  CHECK(std::abs(chordal(zero, one) - kSqrt2) < 1e-15);
  CHECK(std::abs(chordal(inf, one) - kSqrt2) < 1e-15);
  CHECK(std::abs(chordal(one, eye) - kSqrt2) < 1e-15);

  CHECK(chordal(one, one) == 0.0);
  CHECK(log_chordal(one, one) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("chordal is symmetric, bounded, and a metric on random samples") {
  Rng rng(20250816u);
  for (int trial = 0; trial < 5000; ++trial) {
    auto p = testutil::rand_sphere_point(rng);
    auto q = testutil::rand_sphere_point(rng);
    auto r = testutil::rand_sphere_point(rng);

    double pq = chordal(p, q);
    // exact symmetry: the cross terms are exact negations of each other
    CHECK(pq == chordal(q, p));
    CHECK(pq <= 2.0 + 1e-15);
    CHECK(pq >= 0.0);
    // triangle inequality with rounding slack
    CHECK(pq <= chordal(p, r) + chordal(r, q) + 1e-12);
    // squared form agrees with the square
    CHECK(std::abs(chordal_sq(p, q) - pq * pq) <= 1e-13);
  }
}

TEST_CASE("chordal agrees with the affine chart formula") {
  Rng rng(77u);
  for (int trial = 0; trial < 5000; ++trial) {
    Complex<double> a = testutil::rand_complex(rng, -3.0, 3.0);
    Complex<double> b = testutil::rand_complex(rng, -3.0, 3.0);
    double expected = 2.0 * abs(a - b) /
                      std::sqrt((1.0 + norm(a)) * (1.0 + norm(b)));
    double got = chordal(SpherePoint<double>::affine(a), SpherePoint<double>::affine(b));
    CHECK(std::abs(got - expected) <= 1e-10 * (1.0 + expected));
  }
}

TEST_CASE("homogeneous representatives are identified") {
  Rng rng(3u);
  for (int trial = 0; trial < 1000; ++trial) {
    auto p = testutil::rand_sphere_point(rng);
    auto q = testutil::rand_sphere_point(rng);
    Complex<double> lambda = testutil::rand_complex(rng, -5.0, 5.0);
    if (abs(lambda) < 1e-2) continue;
    SpherePoint<double> p2(p.z * lambda, p.w * lambda);
    CHECK(chordal(p, p2) <= 1e-14);
    CHECK(std::abs(chordal(p2, q) - chordal(p, q)) <= 1e-13);
  }
}

TEST_CASE("normalization keeps components in range and survives extreme scales") {
  SpherePoint<double> big(Complex<double>(1e280), Complex<double>(7e279));
  double m = std::max(abs(big.z), abs(big.w));
  CHECK(m >= 0.5);
  CHECK(m <= 1.0);
  CHECK(std::abs(big.affine_value().re - 1e280 / 7e279) < 1e-15 * (1e280 / 7e279));

  SpherePoint<double> tiny(Complex<double>(3e-290), Complex<double>(-4e-290));
  m = std::max(abs(tiny.z), abs(tiny.w));
  CHECK(m >= 0.5);
  CHECK(m <= 1.0);

  CHECK_THROWS_AS(SpherePoint<double>(Complex<double>(0.0), Complex<double>(0.0)),
                  std::invalid_argument);
}

TEST_CASE("log_chordal tracks distances far below double range") {
  // In the 128-bit lane the exponent range is effectively unbounded, so a
  // separation of 1e-200 (whose square underflows a double) must still give
  // the right logarithm.
  using C = Complex<R128>;
  auto p = SpherePoint<R128>::affine(C(R128("1e-200")));
  auto q = SpherePoint<R128>::affine(C(R128("2e-200")));
  double expected = std::log(2.0) - 200.0 * std::log(10.0);
  CHECK(std::abs(log_chordal(p, q) - expected) < 1e-10);

  // the double lane genuinely cannot represent this; make sure the failure
  // mode is the documented -inf, not garbage
  auto pd = SpherePoint<double>::affine(Complex<double>(1e-200));
  auto qd = SpherePoint<double>::affine(Complex<double>(2e-200));
  CHECK(log_chordal(pd, qd) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("lane conversion preserves geometry") {
  Rng rng(99u);
  for (int trial = 0; trial < 200; ++trial) {
    auto p = testutil::rand_sphere_point(rng);
    auto q = testutil::rand_sphere_point(rng);
    auto p2 = SpherePoint<R256>::from(p);
    auto q2 = SpherePoint<R256>::from(q);
    CHECK(std::abs(to_double(chordal(p2, q2)) - chordal(p, q)) <= 1e-14);
  }
}

TEST_CASE("precision lane bookkeeping") {
  CHECK(precision_bits<double>() == 53);
  CHECK(precision_bits<R128>() == 128);
  CHECK(precision_bits<R256>() == 256);
  CHECK(round_up_precision_bits(53) == 53);
  CHECK(round_up_precision_bits(64) == 128);
  CHECK(round_up_precision_bits(256) == 256);
  CHECK(round_up_precision_bits(300) == 512);
  CHECK_THROWS_AS(round_up_precision_bits(513), std::invalid_argument);

  // log_as_double off the double exponent range
  R256 huge = pow(R256(10), 4000);
  CHECK(std::abs(log_as_double(huge) - 4000.0 * std::log(10.0)) < 1e-8);
  R256 tiny = pow(R256(10), -4000);
  CHECK(std::abs(log_as_double(tiny) + 4000.0 * std::log(10.0)) < 1e-8);
}
