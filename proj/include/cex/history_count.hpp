#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace cex {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt binomial(long long n, long long k) {
  if (k < 0 || n < 0 || k > n) return BigInt(0);
  k = std::min(k, n - k);
  BigInt r(1);
  for (long long i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;  // exact: r holds C(n-k+i, i) after each round
  }
  return r;
}

// Number of ordered depth histories: s return depths summing to R, each at
// least Delta. The empty history counts once, and only for R == 0.
inline BigInt history_count(int R, int s, int Delta) {
  if (R < 0 || s < 0 || Delta < 0) {
    throw std::invalid_argument("history_count: negative argument");
  }
  if (s == 0) return BigInt(R == 0 ? 1 : 0);
  std::vector<BigInt> cur(static_cast<size_t>(R) + 1), next(static_cast<size_t>(R) + 1);
  cur[0] = 1;
  for (int part = 1; part <= s; ++part) {
    for (int total = 0; total <= R; ++total) {
      BigInt acc(0);
      for (int r = Delta; r <= total; ++r) {
        acc += cur[static_cast<size_t>(total - r)];
      }
      next[static_cast<size_t>(total)] = std::move(acc);
    }
    std::swap(cur, next);
  }
  return cur[static_cast<size_t>(R)];
}

// Stars-and-bars closed form for the same count: subtract the mandatory
// Delta from every part and distribute the rest freely.
inline BigInt history_count_closed(int R, int s, int Delta) {
  if (R < 0 || s < 0 || Delta < 0) {
    throw std::invalid_argument("history_count_closed: negative argument");
  }
  if (s == 0) return BigInt(R == 0 ? 1 : 0);
  long long free_budget = static_cast<long long>(R) - static_cast<long long>(s) * Delta;
  if (free_budget < 0) return BigInt(0);
  return binomial(free_budget + s - 1, s - 1);
}

// Cheap upper bound independent of Delta.
inline BigInt history_bound(int R, int s) {
  if (R < 0 || s < 0) throw std::invalid_argument("history_bound: negative argument");
  if (s == 0) return BigInt(R == 0 ? 1 : 0);
  return binomial(static_cast<long long>(R) + s - 1, s - 1);
}

}  // namespace cex
