#include "doctest.h"

#include <bit>

#include "resil/circuit.hpp"
#include "resil/errors.hpp"
#include "resil/rng.hpp"

using namespace resil;
using namespace resil::circuit;
using resil::generator::Generator;
using resil::generator::Params;

namespace {

// Hides the closed form so the enumeration path is exercised.
class NoClosedForm final : public BooleanFunction {
 public:
  explicit NoClosedForm(FunctionPtr f) : f_(std::move(f)) {}
  std::uint64_t num_inputs() const override { return f_->num_inputs(); }
  bool is_monotone() const override { return f_->is_monotone(); }
  std::string name() const override { return f_->name(); }
  std::uint64_t eval_words(std::span<const std::uint64_t> x) const override { return f_->eval_words(x); }

 private:
  FunctionPtr f_;
};

class Xor2 final : public BooleanFunction {
 public:
  std::uint64_t num_inputs() const override { return 2; }
  bool is_monotone() const override { return false; }
  std::string name() const override { return "xor2"; }
  std::uint64_t eval_words(std::span<const std::uint64_t> x) const override { return x[0] ^ x[1]; }
};

// Scalar oracle: C_G straight from the generator rows and block sets.
bool scalar_cg(const Generator& g, const std::vector<std::uint8_t>& x) {
  const Params& p = g.params();
  for (Index i = 0; i < p.u; ++i) {
    bool any = false;
    for (std::uint32_t j = 0; j < p.v && !any; ++j) {
      bool all = true;
      for (auto c : generator::block_set(p, g.row(i), j).cells) all = all && x[c];
      any = all;
    }
    if (!any) return false;
  }
  return true;
}

Rational scalar_bias(const Generator& g, const Rational& sigma) {
  const std::uint64_t n = g.params().n();
  Rational total = 0;
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << n); ++a) {
    std::vector<std::uint8_t> x(n);
    for (std::uint64_t k = 0; k < n; ++k) x[k] = (a >> k) & 1;
    if (scalar_cg(g, x)) {
      const auto ones = static_cast<unsigned long>(std::popcount(a));
      total += pow(sigma, ones) * pow(1 - sigma, n - ones);
    }
  }
  return total;
}

std::vector<std::uint8_t> bits_of(std::initializer_list<int> list) {
  std::vector<std::uint8_t> out;
  for (int b : list) out.push_back(static_cast<std::uint8_t>(b));
  return out;
}

}  // namespace

TEST_CASE("Kleene connectives") {
  CHECK(t_and(Ternary::kZero, Ternary::kUnknown) == Ternary::kZero);
  CHECK(t_and(Ternary::kOne, Ternary::kUnknown) == Ternary::kUnknown);
  CHECK(t_or(Ternary::kOne, Ternary::kUnknown) == Ternary::kOne);
  CHECK(t_or(Ternary::kZero, Ternary::kUnknown) == Ternary::kUnknown);
  CHECK(t_not(Ternary::kUnknown) == Ternary::kUnknown);
  CHECK(t_not(Ternary::kZero) == Ternary::kOne);
}

TEST_CASE("circuit terms follow the block sets") {
  const auto tribes = make_tribes(2, 2);
  CHECK(std::vector<std::uint64_t>(tribes->term(0, 0).begin(), tribes->term(0, 0).end()) ==
        std::vector<std::uint64_t>{0, 2});
  CHECK(std::vector<std::uint64_t>(tribes->term(0, 1).begin(), tribes->term(0, 1).end()) ==
        std::vector<std::uint64_t>{1, 3});
  const auto g = generator::build_random(Params{6, 5, 3, Rational(1, 2)}, 2);
  CHECK(build_circuit(g)->num_terms() == 30);
  const auto dup = Generator::from_table(Params{2, 3, 2, Rational(1, 2)}, {1, 1, 1, 1});
  CHECK(build_circuit(dup)->num_terms() == 6);
}

TEST_CASE("three-valued evaluation examples") {
  const auto tribes = make_tribes(2, 2);  // terms {x0, x2}, {x1, x3}
  CHECK(tribes->eval(Assignment{bits_of({1, 1, 1, 1}), {}}) == Ternary::kOne);
  CHECK(tribes->eval(Assignment{bits_of({0, 0, 1, 0}), Coalition(4, {0})}) == Ternary::kUnknown);
  CHECK(tribes->eval(Assignment{bits_of({0, 1, 0, 1}), Coalition(4, {0})}) == Ternary::kOne);
  CHECK(tribes->eval(Assignment{bits_of({0, 1, 0, 0}), Coalition(4, {0})}) == Ternary::kZero);
  const Xor2 x;
  CHECK(x.eval(Assignment{bits_of({0, 1}), Coalition(2, {1})}) == Ternary::kUnknown);
  CHECK(x.eval(Assignment{bits_of({0, 1}), {}}) == Ternary::kOne);
}

TEST_CASE("three-valued evaluation is exact against both completions") {
  RandomStream rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const Params p{1 + rng.below(4), static_cast<std::uint32_t>(2 + rng.below(3)), static_cast<std::uint32_t>(1 + rng.below(3)),
                   Rational(1, 2)};
    const auto g = generator::build_random(p, trial);
    const auto c = build_circuit(g);
    const std::uint64_t n = p.n();
    for (int a = 0; a < 30; ++a) {
      std::vector<std::uint8_t> x(n);
      std::vector<std::uint64_t> q;
      for (std::uint64_t k = 0; k < n; ++k) {
        x[k] = rng.below(2);
        if (rng.below(4) == 0) q.push_back(k);
      }
      auto lo = x, hi = x;
      for (auto k : q) lo[k] = 0, hi[k] = 1;
      const bool vlo = scalar_cg(g, lo), vhi = scalar_cg(g, hi);
      CHECK(vlo <= vhi);
      const Ternary t = c->eval(Assignment{x, Coalition(n, q)});
      if (vlo != vhi) {
        CHECK(t == Ternary::kUnknown);
      } else {
        CHECK(t == (vlo ? Ternary::kOne : Ternary::kZero));
      }
    }
  }
}

TEST_CASE("flipping a bit up never lowers C_G") {
  RandomStream rng(5);
  const auto g = generator::build_random(Params{4, 4, 3, Rational(1, 2)}, 1);
  const auto c = build_circuit(g);
  for (int t = 0; t < 500; ++t) {
    std::vector<std::uint8_t> x(12);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng.below(2));
    const auto k = rng.below(12);
    auto up = x;
    up[k] = 1;
    CHECK(c->eval(x) <= c->eval(up));
  }
}

TEST_CASE("exact bias: closed form, enumeration and scalar oracle agree") {
  const auto tribes = make_tribes(2, 2);
  CHECK(exact_bias(*tribes, Rational(1, 2)) == Rational(7, 16));
  CHECK(exact_bias(NoClosedForm(tribes), Rational(1, 2)) == Rational(7, 16));
  for (std::uint32_t w = 1; w <= 6; ++w) CHECK(exact_bias(*make_tribes(1, w), Rational(1, 2)) == pow(Rational(1, 2), w));
  for (std::uint32_t v = 1; v <= 6; ++v) {
    for (std::uint32_t w = 1; w <= 6; ++w) {
      if (v * w > 22) continue;
      const auto t = make_tribes(v, w);
      for (const Rational sigma : {Rational(1, 2), Rational(1, 4), Rational(1, 8)}) {
        CHECK(exact_bias(NoClosedForm(t), sigma) == 1 - pow(1 - pow(sigma, w), v));
      }
    }
  }
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto g = generator::build_random(Params{3, 3, 3, Rational(1, 2)}, seed);
    CHECK(exact_bias(*build_circuit(g), Rational(1, 3)) == scalar_bias(g, Rational(1, 3)));
  }
  CHECK_THROWS_AS(exact_bias(*build_circuit(generator::build_random(Params{2, 5, 5, Rational(1, 2)}, 0)), Rational(1, 2)),
                  ResourceError);
}

TEST_CASE("exact enumeration does not depend on the thread count") {
  const auto g = generator::build_random(Params{3, 5, 4, Rational(1, 2)}, 7);
  const auto c = build_circuit(g);
  CHECK(exact_bias(*c, Rational(1, 4), 24, 1) == exact_bias(*c, Rational(1, 4), 24, 4));
}

TEST_CASE("Monte-Carlo bias") {
  const Constant one(5, true);
  const auto e1 = mc_bias(one, Rational(1, 2), 1000, 1);
  CHECK(e1.point == 1.0);
  CHECK(e1.std_error == 0.0);
  const auto tribes = make_tribes(2, 2);
  const auto e = mc_bias(*tribes, Rational(1, 2), 1'000'000, 3);
  CHECK(std::abs(e.point - 7.0 / 16) <= 4 * e.std_error);
  CHECK(mc_bias(*tribes, Rational(1, 2), 100'001, 3).point == mc_bias(*tribes, Rational(1, 2), 100'001, 3).point);
  CHECK(mc_bias(*tribes, Rational(1, 2), 300'000, 3, 1).point == mc_bias(*tribes, Rational(1, 2), 300'000, 3, 4).point);
  const auto biased = mc_bias(*make_tribes(3, 2), Rational(1, 3), 500'000, 8);
  CHECK(std::abs(biased.point - to_double(1 - pow(1 - Rational(1, 9), 3))) <= 4 * biased.std_error);
}

TEST_CASE("baselines") {
  const Majority maj3(3);
  CHECK(exact_bias(maj3, Rational(1, 2)) == Rational(1, 2));
  CHECK(exact_bias(NoClosedForm(std::make_shared<Majority>(7)), Rational(1, 3)) ==
        *Majority(7).closed_form_bias(Rational(1, 3)));
  const RecursiveMajority3 rec1(1);
  for (int a = 0; a < 8; ++a) {
    const auto x = bits_of({a & 1, (a >> 1) & 1, (a >> 2) & 1});
    CHECK(rec1.eval(x) == maj3.eval(x));
  }
  const RecursiveMajority3 rec2(2);
  CHECK(exact_bias(NoClosedForm(std::make_shared<RecursiveMajority3>(2)), Rational(1, 3)) ==
        *rec2.closed_form_bias(Rational(1, 3)));
  CHECK(exact_bias(*make_baseline("tribes:2:2"), Rational(1, 2)) == Rational(7, 16));
  CHECK(make_baseline("or:3")->num_inputs() == 3);
  CHECK_THROWS_AS(Majority(4), InputError);
  CHECK_THROWS_AS(make_baseline("parity:3"), InputError);
}

TEST_CASE("coalition strategies") {
  CHECK(Coalition::prefix(10, 3).positions() == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(Coalition::per_column(5, 3, 4).positions() == std::vector<std::uint64_t>{0, 1, 5, 10});
  const auto r = Coalition::random(100, 10, 4);
  CHECK(r.size() == 10);
  CHECK(r.positions() == Coalition::random(100, 10, 4).positions());
  CHECK(Coalition(8, {1, 5, 6}).restrict(4, 4).positions() == std::vector<std::uint64_t>{1, 2});
  CHECK(Coalition(5, {1, 3}).complement() == std::vector<std::uint64_t>{0, 2, 4});
  CHECK_THROWS_AS(Coalition(4, {4}), InputError);
  CHECK_THROWS_AS(Coalition::prefix(3, 4), InputError);
}
