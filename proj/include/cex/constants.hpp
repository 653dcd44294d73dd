#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cex/family.hpp"
#include "cex/returns.hpp"

namespace cex {

// Knobs for the measurement passes behind derive_constants. Defaults match
// the production configuration; tests shrink the grid and horizons.
struct ConstantsInput {
  double delta = 0.049787068367863944;        // e^-3
  double delta_prime = 0.1353352832366127;    // e^-2
  double epsilon1 = 0.1;
  double tau = 0.5;
  double kb = 0.0;              // 0 = delta^4
  double alpha_override = 0.0;  // 0 = derive from the measured exponents
  int grid_size = 1000000;
  int gamma0_horizon = 2000;
  int expansion_horizon = 24;
  int expansion_samples = 4000;
  uint64_t seed = 1;
};

// Every constant the exclusion run depends on, with the measured inputs it
// was derived from. validate() recomputes the whole cascade independently.
struct ConstantsLedger {
  // geometry and user inputs
  double delta = 0.0;
  double delta_prime = 0.0;
  double epsilon1 = 0.0;
  double tau = 0.0;
  double kb = 0.0;
  bool alpha_overridden = false;

  // measured at the base parameter
  double Gamma = 0.0;       // 1.1 * sup log f# over the sphere and parameter probes
  double gamma0 = 0.0;      // ledger slope of the tracked critical value orbits
  double gammaH = 0.0;      // log of the expansion rate outside U
  double C0 = 0.0;          // min_k e^(ledger_k - gamma0 k)
  double lambda_hat = 0.0;  // expansion rate outside U
  int K = 0;                // largest local degree of a critical point

  // derived
  double m = 0.0;  // min(gamma0, gammaH)
  double alpha = 0.0;
  double beta = 0.0;
  double gammaB = 0.0;
  double gammaI = 0.0;
  double gammaC = 0.0;
  double gammaL = 0.0;
  double h = 0.0;
  double theta = 0.0;
  double alpha_hat = 0.0;
  double q_blind = 0.0;
  double epsilon2 = 0.0;
  double S = 0.0;

  std::vector<std::string> validate() const {
    std::vector<std::string> bad;
    auto close = [](double x, double y) {
      double scale = std::max({std::abs(x), std::abs(y), 1.0});
      return std::abs(x - y) <= 1e-12 * scale;
    };
    if (!(delta > 0 && delta < delta_prime && delta_prime < 1)) {
      bad.push_back("need 0 < delta < delta_prime < 1");
    }
    if (!(tau > 0 && tau < 1)) bad.push_back("tau must lie in (0,1)");
    if (!(epsilon1 > 0 && epsilon1 <= 1)) bad.push_back("epsilon1 must lie in (0,1]");
    if (!(kb > 0)) bad.push_back("kb must be positive");
    if (!(K >= 2)) bad.push_back("K must be at least 2");
    if (!(Gamma > 0)) bad.push_back("Gamma must be positive");
    if (!(m > 0)) bad.push_back("m must be positive");
    if (!close(m, std::min(gamma0, gammaH))) bad.push_back("m != min(gamma0, gammaH)");
    if (!alpha_overridden &&
        !close(alpha, m * (1.0 - tau) / (400.0 * K * Gamma))) {
      bad.push_back("alpha != m(1-tau)/(400 K Gamma)");
    }
    if (!(alpha > 0)) bad.push_back("alpha must be positive");
    if (!close(beta, alpha)) bad.push_back("beta != alpha");
    if (!close(gammaB, 0.75 * m * (1.0 - tau))) bad.push_back("gammaB != (3/4) m (1-tau)");
    if (!close(gammaI, m * (1.0 - tau) / 3.0)) bad.push_back("gammaI != (1/3) m (1-tau)");
    if (!close(gammaC, 0.25 * m * (1.0 - tau))) bad.push_back("gammaC != (1/4) m (1-tau)");
    if (!close(gammaL, m * (1.0 - tau) / 6.0)) bad.push_back("gammaL != (1/6) m (1-tau)");
    if (!(gammaI < gammaB / 2.0)) bad.push_back("need gammaI < gammaB / 2");
    if (!close(h, 4.0 * K * K / gammaI)) bad.push_back("h != 4 K^2 / gammaI");
    if (!close(theta, 1.0 / (6.0 * h))) bad.push_back("theta != 1/(6h)");
    if (!close(alpha_hat, 2.0 * K * alpha / gammaI)) bad.push_back("alpha_hat != 2 K alpha / gammaI");
    if (!close(q_blind, 2.0 * alpha)) bad.push_back("q_blind != 2 alpha");
    if (!close(epsilon2, theta * tau / 2.0)) bad.push_back("epsilon2 != theta tau / 2");
    if (!close(S, epsilon1 * delta)) bad.push_back("S != epsilon1 delta");
    if (!close(gammaH, std::log(lambda_hat))) bad.push_back("gammaH != log lambda_hat");
    if (!(C0 > 0)) bad.push_back("C0 must be positive");
    return bad;
  }
};

namespace detail {

// Area-uniform Fibonacci lattice on the sphere, mapped to projective
// coordinates through the south-pole chart (x + iy : 1 - height).
inline void fibonacci_sphere_point(int k, int n, double* x, double* y, double* height) {
  const double golden = 0.6180339887498949;
  double zc = 1.0 - 2.0 * (k + 0.5) / n;
  double phi = 6.283185307179586 * std::fmod(k * golden, 1.0);
  double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
  *x = r * std::cos(phi);
  *y = r * std::sin(phi);
  *height = zc;
}

// Least squares slope of ledger[k] against k over [k0, k1].
inline double ledger_slope(const std::vector<double>& ledger, int k0, int k1) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int k = k0; k <= k1; ++k) {
    double y = ledger[static_cast<size_t>(k)];
    if (!std::isfinite(y)) return -std::numeric_limits<double>::infinity();
    sx += k;
    sy += y;
    sxx += double(k) * k;
    sxy += double(k) * y;
    ++n;
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0) return -std::numeric_limits<double>::infinity();
  return (n * sxy - sx * sy) / denom;
}

}  // namespace detail

// Fill the derived block of a ledger from its geometry and measured fields.
// Callers must have set delta, delta_prime, epsilon1, tau, kb, K, Gamma,
// gamma0, gammaH, lambda_hat and C0 first.
inline void derive_cascade(ConstantsLedger& led, double alpha_override = 0.0) {
  led.m = std::min(led.gamma0, led.gammaH);
  if (!(led.m > 0)) throw MapError("family not numerically CE at base");
  const double m1t = led.m * (1.0 - led.tau);
  if (alpha_override > 0) {
    led.alpha = alpha_override;
    led.alpha_overridden = true;
  } else {
    led.alpha = m1t / (400.0 * led.K * led.Gamma);
  }
  led.beta = led.alpha;
  led.gammaB = 0.75 * m1t;
  led.gammaI = m1t / 3.0;
  led.gammaC = 0.25 * m1t;
  led.gammaL = m1t / 6.0;
  led.h = 4.0 * led.K * led.K / led.gammaI;
  led.theta = 1.0 / (6.0 * led.h);
  led.alpha_hat = 2.0 * led.K * led.alpha / led.gammaI;
  led.q_blind = 2.0 * led.alpha;
  led.epsilon2 = led.theta * led.tau / 2.0;
  led.S = led.epsilon1 * led.delta;
}

// Measure the base parameter and derive the full constant cascade. All
// measurements run in the double lane regardless of the family's own lane.
template <class R>
ConstantsLedger derive_constants(const RationalFamily<R>& fam, const ConstantsInput& in) {
  if (!(in.delta > 0 && in.delta < in.delta_prime && in.delta_prime < 1)) {
    throw MapError("derive_constants: need 0 < delta < delta_prime < 1");
  }
  if (!(in.tau > 0 && in.tau < 1)) throw MapError("derive_constants: tau must lie in (0,1)");
  if (in.grid_size < 100) throw MapError("derive_constants: grid too small");

  ConstantsLedger led;
  led.delta = in.delta;
  led.delta_prime = in.delta_prime;
  led.epsilon1 = in.epsilon1;
  led.tau = in.tau;
  led.kb = in.kb > 0 ? in.kb : std::pow(in.delta, 4.0);
  led.K = fam.max_local_degree();

  // Gamma: sup log f# over an area-uniform grid, across parameter probes
  // spanning the window. The 1.1 factor absorbs grid resolution.
  double sup_log = -std::numeric_limits<double>::infinity();
  const double eps = fam.param_radius();
  const double probes[] = {0.0, 0.5 * eps, -0.5 * eps, eps, -eps};
  for (double t : probes) {
    RationalMap<double> f = convert_map<double>(fam.map_at(R(t)));
    for (int k = 0; k < in.grid_size; ++k) {
      double x, y, height;
      detail::fibonacci_sphere_point(k, in.grid_size, &x, &y, &height);
      SpherePoint<double> p(Complex<double>(x, y), Complex<double>(1.0 - height, 0.0));
      double fs = f.spherical_derivative(p);
      if (fs > 0) {
        double lg = std::log(fs);
        if (lg > sup_log) sup_log = lg;
      }
    }
  }
  if (!(sup_log > 0)) throw MapError("derive_constants: no expansion found on the grid");
  led.Gamma = 1.1 * sup_log;

  // gamma0 and C0 from the tracked critical value orbits at the base.
  RationalMap<double> f0 = convert_map<double>(fam.base());
  led.gamma0 = std::numeric_limits<double>::infinity();
  led.C0 = std::numeric_limits<double>::infinity();
  for (int l : fam.tracked()) {
    SpherePoint<double> c =
        SpherePoint<double>::template from<R>(fam.paths()[static_cast<size_t>(l)].base.location);
    OrbitTrace<double> vo = iterate_orbit(f0, f0.evaluate(c), in.gamma0_horizon);
    vo.start_index = 1;
    int hz = std::min(vo.certified_horizon, vo.length());
    if (hz < 10) {
      throw MapError("derive_constants: certified horizon too short for the base exponent");
    }
    double slope = detail::ledger_slope(vo.ledger, (hz + 1) / 2, hz);
    if (slope < led.gamma0) led.gamma0 = slope;
    if (std::isfinite(slope)) {
      for (int k = 1; k <= hz; ++k) {
        double c0 = std::exp(vo.ledger[static_cast<size_t>(k)] - slope * k);
        if (c0 < led.C0) led.C0 = c0;
      }
    }
  }

  // a collapsing critical ledger already settles the question
  if (!(led.gamma0 > 0)) throw MapError("family not numerically CE at base");

  // gammaH from the empirical expansion outside U at the base parameter.
  NeighborhoodSystem nbhd(in.delta_prime, in.delta);
  nbhd.validate(f0.critical_points());
  auto oe = outside_expansion_estimate(f0, f0.critical_points(), nbhd, in.expansion_horizon,
                                       in.expansion_samples, in.seed);
  led.lambda_hat = oe.lambda_hat;
  led.gammaH = std::log(oe.lambda_hat);

  derive_cascade(led, in.alpha_override);

  auto bad = led.validate();
  if (!bad.empty()) {
    throw MapError("derive_constants: internal inconsistency: " + bad.front());
  }
  return led;
}

}  // namespace cex
