#include "doctest.h"

#include <map>
#include <set>

#include "resil/errors.hpp"
#include "resil/galois.hpp"

using namespace resil;
using namespace resil::galois;

TEST_CASE("is_prime on small values") {
  CHECK(is_prime(13));
  CHECK_FALSE(is_prime(4));
  CHECK(is_prime(2));
  CHECK_FALSE(is_prime(1));
  CHECK_FALSE(is_prime(0));
  CHECK(is_prime(10007));
  CHECK_FALSE(is_prime(1009 * 1013));
}

TEST_CASE("field inverse uses the 0 -> 0 convention") {
  PrimeField f(7);
  CHECK(f.inv(3) == 5);
  CHECK(f.inv(0) == 0);
  for (std::uint32_t x = 1; x < 7; ++x) CHECK(f.mul(x, f.inv(x)) == 1);
}

TEST_CASE("rs_encode evaluates the message polynomial") {
  PrimeField f(5);
  CHECK(rs_encode(RSCode(f, 1, 3), std::vector<std::uint32_t>{2}) == std::vector<std::uint32_t>{2, 2, 2});
  RSCode code(f, 2, std::vector<std::uint32_t>{0, 1, 2});
  CHECK(code.encode(std::vector<std::uint32_t>{1, 1}) == std::vector<std::uint32_t>{1, 2, 3});
  CHECK(code.encode(std::vector<std::uint32_t>{0, 3}) == std::vector<std::uint32_t>{0, 3, 1});
  CHECK_THROWS_AS(code.encode(std::vector<std::uint32_t>{1}), InputError);
  CHECK_THROWS_AS(code.encode(std::vector<std::uint32_t>{1, 5}), InputError);
}

TEST_CASE("constant-free layout multiplies by the evaluation point") {
  RSCode code(PrimeField(5), 2, 3, RsLayout::kNoConstant);
  CHECK(code.eval_points() == std::vector<std::uint32_t>{1, 2, 3});
  // 2x + 1x^2 at 1, 2, 3
  CHECK(code.encode(std::vector<std::uint32_t>{2, 1}) == std::vector<std::uint32_t>{3, 3, 0});
  CHECK_THROWS_AS(RSCode(PrimeField(5), 2, std::vector<std::uint32_t>{0, 1}, RsLayout::kNoConstant), InputError);
}

TEST_CASE("index_to_message is base-v, least significant first") {
  RSCode c52(PrimeField(5), 2, 3);
  CHECK(index_to_message(c52, 0) == std::vector<std::uint32_t>{0, 0});
  CHECK(index_to_message(c52, 7) == std::vector<std::uint32_t>{2, 1});
  CHECK(index_to_message(RSCode(PrimeField(3), 3, 3), 26) == std::vector<std::uint32_t>{2, 2, 2});
  CHECK_THROWS_AS(c52.index_to_message(25), InputError);
  for (Index i = 0; i < 25; ++i) CHECK(c52.message_to_index(c52.index_to_message(i)) == i);
}

namespace {

std::vector<std::vector<std::uint32_t>> all_codewords(const RSCode& code) {
  std::vector<std::vector<std::uint32_t>> out;
  for (Index i = 0; i < code.num_messages(); ++i) out.push_back(code.encode(code.index_to_message(i)));
  return out;
}

}  // namespace

TEST_CASE("distinct codewords agree in at most ell - 1 places") {
  for (std::uint32_t v : {2U, 3U, 5U, 7U, 11U, 13U}) {
    for (unsigned ell = 1; ell <= 3; ++ell) {
      for (auto layout : {RsLayout::kWithConstant, RsLayout::kNoConstant}) {
        const unsigned len = layout == RsLayout::kNoConstant ? v - 1 : v;
        if (len < ell) continue;
        const RSCode code(PrimeField(v), ell, len, layout);
        const auto words = all_codewords(code);
        unsigned worst = 0;
        for (std::size_t a = 0; a < words.size(); ++a) {
          for (std::size_t b = a + 1; b < words.size(); ++b) {
            unsigned agree = 0;
            for (unsigned k = 0; k < len; ++k) agree += words[a][k] == words[b][k];
            worst = std::max(worst, agree);
          }
        }
        CAPTURE(v);
        CAPTURE(ell);
        CHECK(worst <= ell - 1);
      }
    }
  }
}

TEST_CASE("every ell-subset of coordinates is uniform") {
  for (std::uint32_t v : {2U, 3U, 5U, 7U}) {
    for (unsigned ell = 1; ell <= 2; ++ell) {
      for (auto layout : {RsLayout::kWithConstant, RsLayout::kNoConstant}) {
        const unsigned len = layout == RsLayout::kNoConstant ? v - 1 : v;
        if (len < ell) continue;
        const RSCode code(PrimeField(v), ell, len, layout);
        const auto words = all_codewords(code);
        for (unsigned a = 0; a < len; ++a) {
          for (unsigned b = ell == 2 ? a + 1 : a; b < (ell == 2 ? len : a + 1); ++b) {
            std::map<std::pair<std::uint32_t, std::uint32_t>, int> hits;
            for (const auto& wd : words) ++hits[{wd[a], ell == 2 ? wd[b] : 0U}];
            CHECK(hits.size() == words.size());
            for (const auto& [key, count] : hits) CHECK(count == 1);
          }
        }
      }
    }
  }
}
