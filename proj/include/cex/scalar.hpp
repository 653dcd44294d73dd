#pragma once

// Real scalar lanes. Everything dynamical is templated on the real type R so
// the same code runs on hardware doubles (exploratory scans) and on
// cpp_bin_float lanes (certified runs). Each lane has a wider partner used to
// re-run orbits at twice the precision for the divergence check.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace cex {

namespace mp = boost::multiprecision;

template <unsigned Bits>
using BinFloat = mp::number<mp::cpp_bin_float<Bits, mp::digit_base_2>, mp::et_off>;

using R128 = BinFloat<128>;
using R256 = BinFloat<256>;
using R512 = BinFloat<512>;
using R1024 = BinFloat<1024>;

template <class R>
struct WiderOf;
template <>
struct WiderOf<double> {
  using type = R128;
};
template <>
struct WiderOf<R128> {
  using type = R256;
};
template <>
struct WiderOf<R256> {
  using type = R512;
};
template <>
struct WiderOf<R512> {
  using type = R1024;
};

template <class R>
using Wider = typename WiderOf<R>::type;

template <class R>
constexpr int precision_bits() {
  return std::numeric_limits<R>::digits;
}

inline double to_double(double x) { return x; }

template <class R>
double to_double(const R& x) {
  return static_cast<double>(x);
}

template <class To, class From>
To convert_real(const From& x) {
  if constexpr (std::is_same_v<To, From>) {
    return x;
  } else {
    return static_cast<To>(x);
  }
}

// log of a positive scalar, returned as a double. Goes through frexp so that
// magnitudes far outside double range (routine at 512 bits) survive.
template <class R>
double log_as_double(const R& x) {
  if (x <= 0) return -std::numeric_limits<double>::infinity();
  using std::frexp;
  int e = 0;
  R m = frexp(x, &e);
  return std::log(to_double(m)) + static_cast<double>(e) * 0.6931471805599453;
}

inline double log_as_double(double x) {
  if (x <= 0) return -std::numeric_limits<double>::infinity();
  return std::log(x);
}

// Supported engine lanes, in ascending precision. Requests round up.
inline int round_up_precision_bits(int requested) {
  for (int lane : {53, 128, 256, 512}) {
    if (requested <= lane) return lane;
  }
  throw std::invalid_argument(
      "precision_bits: requested " + std::to_string(requested) +
      " exceeds the largest compiled lane (512)");
}

}  // namespace cex
