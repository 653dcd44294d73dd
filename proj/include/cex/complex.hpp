#pragma once

// Small complex value type over an arbitrary real scalar. std::complex is only
// specified for the builtin floating types, and we need the same arithmetic on
// multiprecision reals.

#include <cmath>
#include <utility>

namespace cex {

template <class R>
struct Complex {
  R re{};
  R im{};

  Complex() = default;
  Complex(R r) : re(std::move(r)) {}
  Complex(R r, R i) : re(std::move(r)), im(std::move(i)) {}

  template <class S>
  static Complex from(const Complex<S>& o) {
    return Complex(static_cast<R>(o.re), static_cast<R>(o.im));
  }

  Complex& operator+=(const Complex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Complex& operator-=(const Complex& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Complex& operator*=(const Complex& o) { return *this = *this * o; }
  Complex& operator*=(const R& s) {
    re *= s;
    im *= s;
    return *this;
  }
  Complex& operator/=(const R& s) {
    re /= s;
    im /= s;
    return *this;
  }

  friend Complex operator+(const Complex& a, const Complex& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend Complex operator-(const Complex& a, const Complex& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend Complex operator-(const Complex& a) { return {-a.re, -a.im}; }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend Complex operator*(const R& s, const Complex& a) {
    return {s * a.re, s * a.im};
  }
  friend Complex operator*(const Complex& a, const R& s) { return s * a; }
  friend bool operator==(const Complex& a, const Complex& b) {
    return a.re == b.re && a.im == b.im;
  }
  friend bool operator!=(const Complex& a, const Complex& b) {
    return !(a == b);
  }
};

template <class R>
Complex<R> conj(const Complex<R>& a) {
  return {a.re, -a.im};
}

template <class R>
R norm(const Complex<R>& a) {
  return a.re * a.re + a.im * a.im;
}

template <class R>
R abs(const Complex<R>& a) {
  using std::abs;
  using std::sqrt;
  R x = abs(a.re);
  R y = abs(a.im);
  if (x < y) std::swap(x, y);
  if (x == 0) return R(0);
  R q = y / x;
  return x * sqrt(R(1) + q * q);
}

// Smith's algorithm; avoids overflow in the intermediate products.
template <class R>
Complex<R> operator/(const Complex<R>& a, const Complex<R>& b) {
  using std::abs;
  if (abs(b.re) >= abs(b.im)) {
    R t = b.im / b.re;
    R d = b.re + b.im * t;
    return {(a.re + a.im * t) / d, (a.im - a.re * t) / d};
  }
  R t = b.re / b.im;
  R d = b.re * t + b.im;
  return {(a.re * t + a.im) / d, (a.im * t - a.re) / d};
}

template <class R>
Complex<R> inverse(const Complex<R>& a) {
  return Complex<R>(R(1)) / a;
}

}  // namespace cex
