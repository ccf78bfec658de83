#include "doctest.h"

#include "resil/errors.hpp"
#include "resil/numeric.hpp"
#include "resil/rng.hpp"

using namespace resil;

TEST_CASE("rationals parse only as p/q and canonicalize") {
  CHECK(parse_rational("2/4") == Rational(1, 2));
  CHECK(to_string(parse_rational("6/3")) == "2");
  CHECK(to_string(parse_rational("3/9")) == "1/3");
  CHECK_THROWS_AS(parse_rational("0.5"), InputError);
  CHECK_THROWS_AS(parse_rational("1/0"), InputError);
  CHECK_THROWS_AS(parse_rational("-1/2"), InputError);
}

TEST_CASE("128-bit indices print, parse and detect overflow") {
  const Index big = (Index{1} << 100) + 7;
  CHECK(parse_index(index_to_string(big)) == big);
  CHECK(index_to_string(0) == "0");
  CHECK(to_bigint(big) == (BigInt(1) << 100) + 7);
  Index out = 0;
  CHECK(checked_pow(3, 80, out));
  CHECK_FALSE(checked_pow(3, 81, out));
  CHECK_THROWS_AS(parse_index("340282366920938463463374607431768211456"), InputError);
}

TEST_CASE("rational powers stay exact") {
  CHECK(pow(Rational(2, 3), 3) == Rational(8, 27));
  CHECK(pow(Rational(5, 7), 0) == Rational(1));
}

TEST_CASE("substreams are deterministic and distinct") {
  RandomStream a(42, 3), b(42, 3), c(42, 4);
  const auto x = a.word();
  CHECK(x == b.word());
  CHECK(x != c.word());
}

TEST_CASE("below stays in range and hits every value") {
  RandomStream rng(7);
  std::vector<int> seen(5, 0);
  for (int t = 0; t < 1000; ++t) {
    const auto x = rng.below(5);
    REQUIRE(x < 5);
    ++seen[x];
  }
  for (int c : seen) CHECK(c > 150);
}

TEST_CASE("Bernoulli words match their probability") {
  for (const Rational p : {Rational(1, 2), Rational(3, 8), Rational(1, 3), Rational(0), Rational(1)}) {
    BernoulliWords bern(p);
    RandomStream rng(11);
    const int words = 4000;
    long ones = 0;
    for (int t = 0; t < words; ++t) ones += __builtin_popcountll(bern.draw(rng));
    const double n = 64.0 * words;
    const double q = p.get_d();
    const double sd = std::sqrt(n * q * (1 - q));
    CHECK(std::abs(ones - n * q) <= 5 * sd + 1e-9);
  }
}
