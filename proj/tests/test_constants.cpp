#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cex/constants.hpp"
#include "test_util.hpp"

using namespace cex;
using Catch::Matchers::ContainsSubstring;

namespace {

Poly<double> poly(std::initializer_list<double> cs) {
  Poly<double> p;
  for (double c : cs) p.push_back(Complex<double>(c, 0.0));
  return p;
}

ConstantsInput test_input() {
  ConstantsInput in;
  in.grid_size = 40000;  // production uses 10^6; this keeps the suite quick
  in.expansion_samples = 2000;
  return in;
}

}  // namespace

TEST_CASE("constants derivation on the reference family") {
  auto fam = make_builtin_family<double>("lattes2", 1e-3);
  auto led = derive_constants(fam, test_input());

  // the base critical orbit sits on a multiplier-4 cycle
  CHECK(led.gamma0 == Catch::Approx(std::log(4.0)).margin(0.01));
  CHECK(led.K == 2);
  CHECK(led.C0 > 0.9);
  CHECK(led.C0 < 1.01);
  CHECK(led.Gamma > 1.5);
  CHECK(led.Gamma < 2.2);
  CHECK(led.lambda_hat > 1.0);
  CHECK(led.gammaH == Catch::Approx(std::log(led.lambda_hat)));
  CHECK(led.m == std::min(led.gamma0, led.gammaH));
  CHECK(led.m > 0.0);

  // the whole derived cascade, recomputed here
  const double m1t = led.m * (1.0 - led.tau);
  CHECK(led.alpha == Catch::Approx(m1t / (400.0 * led.K * led.Gamma)).epsilon(1e-15));
  CHECK(led.beta == led.alpha);
  CHECK(led.gammaB == Catch::Approx(0.75 * m1t).epsilon(1e-15));
  CHECK(led.gammaI == Catch::Approx(m1t / 3.0).epsilon(1e-15));
  CHECK(led.gammaC == Catch::Approx(0.25 * m1t).epsilon(1e-15));
  CHECK(led.gammaL == Catch::Approx(m1t / 6.0).epsilon(1e-15));
  CHECK(led.h == Catch::Approx(4.0 * led.K * led.K / led.gammaI).epsilon(1e-15));
  CHECK(led.theta == Catch::Approx(1.0 / (6.0 * led.h)).epsilon(1e-15));
  CHECK(led.alpha_hat == Catch::Approx(2.0 * led.K * led.alpha / led.gammaI).epsilon(1e-15));
  CHECK(led.q_blind == 2.0 * led.alpha);
  CHECK(led.epsilon2 == Catch::Approx(led.theta * led.tau / 2.0).epsilon(1e-15));
  CHECK(led.S == Catch::Approx(led.epsilon1 * led.delta).epsilon(1e-15));
  CHECK(led.kb == Catch::Approx(std::pow(led.delta, 4.0)).epsilon(1e-15));

  // structural invariants
  CHECK(led.gammaI < led.gammaB / 2.0);
  CHECK(led.delta < led.delta_prime);
  CHECK(led.delta_prime < 1.0);
  CHECK(led.validate().empty());
}

TEST_CASE("constants derivation is deterministic") {
  auto fam = make_builtin_family<double>("lattes2", 1e-3);
  auto in = test_input();
  auto a = derive_constants(fam, in);
  auto b = derive_constants(fam, in);
  CHECK(a.Gamma == b.Gamma);
  CHECK(a.gamma0 == b.gamma0);
  CHECK(a.lambda_hat == b.lambda_hat);
  CHECK(a.alpha == b.alpha);
  CHECK(a.C0 == b.C0);
}

TEST_CASE("validate flags corrupted ledgers") {
  auto fam = make_builtin_family<double>("lattes2", 1e-3);
  auto led = derive_constants(fam, test_input());
  REQUIRE(led.validate().empty());

  auto broken = led;
  broken.h *= 2.0;
  auto bad = broken.validate();
  REQUIRE(!bad.empty());
  bool found = false;
  for (const auto& s : bad) found = found || s.find("h !=") != std::string::npos;
  CHECK(found);

  broken = led;
  broken.delta = 0.5;  // above delta_prime
  bad = broken.validate();
  REQUIRE(!bad.empty());
  CHECK_THAT(bad.front(), ContainsSubstring("delta"));

  broken = led;
  broken.beta = led.alpha * 1.5;
  bad = broken.validate();
  REQUIRE(!bad.empty());
  bool found_beta = false;
  for (const auto& s : bad) found_beta = found_beta || s.find("beta") != std::string::npos;
  CHECK(found_beta);
}

TEST_CASE("alpha override is honored and recorded") {
  auto fam = make_builtin_family<double>("lattes2", 1e-3);
  auto in = test_input();
  in.alpha_override = 1e-4;
  auto led = derive_constants(fam, in);
  CHECK(led.alpha == 1e-4);
  CHECK(led.beta == 1e-4);
  CHECK(led.alpha_overridden);
  CHECK(led.q_blind == 2e-4);
  CHECK(led.validate().empty());
}

TEST_CASE("a superattracting critical orbit is rejected as not expanding") {
  // z^2 + a: the finite critical point is fixed at the base, so its value
  // orbit never leaves it and the ledger collapses to -infinity
  RationalFamily<double> fam(poly({0.0, 0.0, 1.0}), poly({1.0}), poly({1.0}), 0.5);
  CHECK_THROWS_WITH(derive_constants(fam, test_input()),
                    ContainsSubstring("not numerically CE"));
}

TEST_CASE("malformed constant inputs are rejected up front") {
  auto fam = make_builtin_family<double>("lattes2", 1e-3);
  auto in = test_input();
  in.delta = in.delta_prime;
  CHECK_THROWS_WITH(derive_constants(fam, in), ContainsSubstring("delta"));

  in = test_input();
  in.tau = 1.0;
  CHECK_THROWS_WITH(derive_constants(fam, in), ContainsSubstring("tau"));

  in = test_input();
  in.grid_size = 10;
  CHECK_THROWS_WITH(derive_constants(fam, in), ContainsSubstring("grid"));
}
