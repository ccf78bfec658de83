#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "resil/circuit.hpp"
#include "resil/numeric.hpp"

// Everything here is under the uniform distribution B_{1/2}.
namespace resil::balance {

// OR of the prefix terms !x_1 ... !x_{i-1} x_i for every set bit alpha_i of
// k = alpha_1 2^(n-1) + ... + alpha_n; k = 2^n is the constant-true DNF.
class DyadicDNF final : public circuit::BooleanFunction {
 public:
  DyadicDNF(std::uint64_t n, BigInt k);

  const BigInt& numerator() const noexcept { return k_; }
  bool constant_true() const noexcept { return constant_true_; }
  // 1-based term indices i, ascending.
  const std::vector<std::uint64_t>& terms() const noexcept { return terms_; }
  // Number of inputs satisfying term i: 2^(n - i).
  BigInt satisfying_count() const;
  // P over the other bits that flipping input `position` changes D.
  Rational bit_influence(std::uint64_t position, const Rational& sigma) const;
  std::vector<Rational> bit_influences(const Rational& sigma) const;

  std::uint64_t num_inputs() const override { return n_; }
  bool is_monotone() const override { return false; }
  std::string name() const override;
  std::uint64_t eval_words(std::span<const std::uint64_t> inputs) const override;
  circuit::TernaryWords eval_ternary_words(std::span<const std::uint64_t> inputs,
                                           const circuit::Coalition& q) const override;
  std::optional<Rational> closed_form_bias(const Rational& sigma) const override;

 private:
  std::uint64_t n_;
  BigInt k_;
  bool constant_true_ = false;
  std::vector<std::uint64_t> terms_;
  std::vector<std::uint8_t> alpha_;
};

std::shared_ptr<const DyadicDNF> build_dyadic_dnf(std::uint64_t n, const BigInt& k);

// C'(x, y) = (C1(x) & C2(y)) | (D(x) & !C2(y)); x is the first c1 inputs,
// y the next c2 inputs, and D reads x.
class Composite final : public circuit::BooleanFunction {
 public:
  Composite(circuit::FunctionPtr c1, circuit::FunctionPtr c2, std::shared_ptr<const DyadicDNF> d);

  std::uint64_t x_bits() const noexcept { return c1_->num_inputs(); }
  std::uint64_t y_bits() const noexcept { return c2_->num_inputs(); }

  std::uint64_t num_inputs() const override { return x_bits() + y_bits(); }
  bool is_monotone() const override { return false; }
  std::string name() const override;
  std::uint64_t eval_words(std::span<const std::uint64_t> inputs) const override;
  // Exact: since x and y are disjoint, C' can be 1 iff (C2 can be 1 and C1
  // can be 1) or (C2 can be 0 and D can be 1), and likewise for 0.
  circuit::TernaryWords eval_ternary_words(std::span<const std::uint64_t> inputs,
                                           const circuit::Coalition& q) const override;
  std::optional<Rational> closed_form_bias(const Rational& sigma) const override;

 private:
  circuit::FunctionPtr c1_, c2_;
  std::shared_ptr<const DyadicDNF> d_;
};

enum class Mode { kPaper, kExactDyadic };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

struct BalancedComposite {
  Mode mode = Mode::kPaper;
  circuit::FunctionPtr c1, c2;
  std::shared_ptr<const DyadicDNF> d;
  std::shared_ptr<const Composite> circuit;
  Rational e1, e2;
  Rational delta;  // E[C1] - 1/2
  Rational mu;     // 1 - E[C2]
  Rational target;    // 1/2 + delta - delta/mu
  Rational dnf_mean;  // k / 2^n
  Rational mean;      // E[C'] = E[C1] E[C2] + E[D] mu
  Rational residual;  // |E[C'] - 1/2|
};

// E[c1], E[c2] come from circuit::exact_bias (closed form or enumeration).
// Paper mode rounds k = 2^n target to the nearest integer; exact-dyadic mode
// refuses unless the target is a multiple of 2^-n.
BalancedComposite compose_balanced(circuit::FunctionPtr c1, circuit::FunctionPtr c2, Mode mode,
                                   unsigned max_bits = circuit::kDefaultEnumerationBits, unsigned threads = 1);

// P[C1(x) != D(x)]. Read-once tribes C1 is handled in closed form, anything
// else by enumeration of its inputs (up to max_bits).
Rational disagreement(const circuit::BooleanFunction& c1, const DyadicDNF& d,
                      unsigned max_bits = circuit::kDefaultEnumerationBits);

// Single-input influence of f: closed form for read-once tribes and the DNF,
// enumeration otherwise.
Rational bit_influence(const circuit::BooleanFunction& f, std::uint64_t position,
                       unsigned max_bits = circuit::kDefaultEnumerationBits);

struct SingletonReport {
  Rational worst;  // max over positions of I_{p}(C')
  std::uint64_t worst_position = 0;
  Rational worst_lemma_bound;  // max over positions of I(C1) + I(C2) + P[C2 = 0] split by side
};

// Exact I_{p}(C') for every input p: x-side E[C2] I_p(C1) + mu I_p(D),
// y-side I_p(C2) P[C1 != D].
SingletonReport singleton_influences(const BalancedComposite& b,
                                     unsigned max_bits = circuit::kDefaultEnumerationBits);

enum class SecondKind { kTribes, kOr };

std::string to_string(SecondKind kind);
SecondKind parse_second_kind(const std::string& text);

struct KklOptions {
  Mode mode = Mode::kPaper;
  SecondKind second = SecondKind::kTribes;
};

struct KklRecord {
  std::uint64_t n_target = 0;
  std::uint32_t w = 0, v = 0;  // C1 = tribes with v = ceil(2^w ln 2)
  std::uint64_t n = 0;         // v w
  double c1 = 0.0;             // |E[C1] - 1/2| n / ln n
  SecondKind second = SecondKind::kTribes;
  std::uint32_t w2 = 0, v2 = 0;  // OR-based C2 has w2 = 1, v2 = t
  double log_argument = 0.0;     // ln(n / (3 c1 ln n)) for the tribes C2
  std::uint64_t total_bits = 0;
  Rational influence_c1;  // any single input of C1
  Rational influence_c2;  // (1 - 2^-w2)^(v2 - 1) 2^-(w2 - 1)
  SingletonReport singleton;
  double kkl_constant = 0.0;  // worst influence * N / ln N with N = total_bits
};

struct KklMatcher {
  BalancedComposite composite;
  KklRecord record;
};

// Smallest admissible n_target: 64 with a tribes C2, 5 with an OR C2 (below
// that the width-1 C1 = OR(2) has delta = 1/4 and no OR C2 has mu > 1/2).
std::uint64_t min_n_target(SecondKind kind);

KklMatcher build_kkl_matcher(std::uint64_t n_target, const KklOptions& opts = {});

}  // namespace resil::balance
