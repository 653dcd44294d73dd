#include <catch2/catch_amalgamated.hpp>

#include <chrono>

#include "cex/history_count.hpp"

using namespace cex;

namespace {

// Independent oracle: enumerate every composition recursively.
long long enumerate(int R, int s, int Delta) {
  if (s == 0) return R == 0 ? 1 : 0;
  long long total = 0;
  for (int r = Delta; r <= R; ++r) total += enumerate(R - r, s - 1, Delta);
  return total;
}

}  // namespace

TEST_CASE("history count matches the worked examples") {
  CHECK(history_count(2, 2, 1) == 1);
  CHECK(history_bound(2, 2) == 3);
  CHECK(history_count(3, 2, 1) == 2);
  CHECK(history_bound(3, 2) == 4);
}

TEST_CASE("empty histories count once and only for a zero budget") {
  CHECK(history_count(0, 0, 1) == 1);
  CHECK(history_count(5, 0, 1) == 0);
  CHECK(history_count_closed(0, 0, 3) == 1);
  CHECK(history_count_closed(4, 0, 3) == 0);
  CHECK(history_bound(0, 0) == 1);
  CHECK(history_bound(2, 0) == 0);
}

TEST_CASE("binomial helper on small exact values") {
  CHECK(binomial(0, 0) == 1);
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(30, 15) == 155117520);
  CHECK(binomial(4, 7) == 0);
  CHECK(binomial(4, -1) == 0);
  // 60 choose 30 overflows 32-bit but not the exact integer
  CHECK(binomial(60, 30) == BigInt("118264581564861424"));
}

TEST_CASE("dynamic program, closed form, and enumeration agree on a small grid") {
  for (int Delta : {1, 2, 3}) {
    for (int R = 0; R <= 12; ++R) {
      for (int s = 0; s <= R; ++s) {
        BigInt dp = history_count(R, s, Delta);
        INFO("R=" << R << " s=" << s << " Delta=" << Delta);
        CHECK(dp == history_count_closed(R, s, Delta));
        CHECK(dp == enumerate(R, s, Delta));
        CHECK(dp <= history_bound(R, s));
      }
    }
  }
}

TEST_CASE("exhaustive cross-check up to R = 30 stays fast") {
  auto t0 = std::chrono::steady_clock::now();
  for (int Delta : {1, 2, 3}) {
    for (int R = 0; R <= 30; ++R) {
      for (int s = 0; s <= R; ++s) {
        BigInt dp = history_count(R, s, Delta);
        INFO("R=" << R << " s=" << s << " Delta=" << Delta);
        REQUIRE(dp == history_count_closed(R, s, Delta));
        REQUIRE(dp <= history_bound(R, s));
      }
    }
  }
  auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(dt < 10.0);
}

TEST_CASE("negative arguments are rejected") {
  CHECK_THROWS_AS(history_count(-1, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(history_count(3, -1, 1), std::invalid_argument);
  CHECK_THROWS_AS(history_count(3, 2, -1), std::invalid_argument);
  CHECK_THROWS_AS(history_bound(-1, 0), std::invalid_argument);
}
