#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resil/circuit.hpp"
#include "resil/errors.hpp"
#include "resil/generator.hpp"
#include "resil/numeric.hpp"

namespace resil::analysis {

// ---------------------------------------------------------------- bias

inline constexpr std::uint64_t kExactBiasBitLimit = std::uint64_t{1} << 22;

// (1 - (1 - sigma^w)^v)^u. Exact while the rational stays below
// exact_bit_limit bits; otherwise a 256-bit directed-rounding interval.
struct BiasValue {
  std::optional<Rational> exact;
  double lower = 0.0;
  double upper = 0.0;
  double point = 0.0;
  unsigned precision_bits = 0;  // 0 when exact
};

BiasValue bias_formula(Index u, std::uint64_t v, std::uint64_t w, const Rational& sigma,
                       std::uint64_t exact_bit_limit = kExactBiasBitLimit);

struct BiasTarget {
  Index u = 0;
  unsigned w = 0;
  Rational sigma;
  double v_real = 0.0;  // sigma^-w ln(u / ln 2)
  std::uint64_t v = 0;
  BiasValue bias;
  double residual = 0.0;        // upper end of |bias - 1/2|
  double residual_bound = 0.0;  // constant * sigma^w
  bool within_bound = false;
};

inline constexpr double kBiasConstant = 8.0;

BiasTarget solve_v(Index u, unsigned w, const Rational& sigma, double constant = kBiasConstant);

// ---------------------------------------------------------------- influence

enum class InfluenceMode { kExact, kMonteCarlo, kAnalyticUpper };
std::string to_string(InfluenceMode mode);

struct InfluenceEstimate {
  InfluenceMode mode = InfluenceMode::kExact;
  double point = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::optional<Rational> exact;
};

// P over the non-coalition bits ~ B_sigma that f is not fixed.
InfluenceEstimate influence_exact(const circuit::BooleanFunction& f, const circuit::Coalition& q, const Rational& sigma,
                                  unsigned max_free_bits = circuit::kDefaultEnumerationBits, unsigned threads = 1);
InfluenceEstimate influence_mc(const circuit::BooleanFunction& f, const circuit::Coalition& q, const Rational& sigma,
                               std::uint64_t samples, std::uint64_t seed, unsigned threads = 1);
// Sum over rows of (1 - sigma^w)^(v - m_i) * min(1, sum_{j hit} sigma^(w - |S(i,j) ∩ Q|)),
// m_i = number of terms of row i meeting Q.
InfluenceEstimate influence_analytic_bound(const circuit::ResilientCircuit& c, const circuit::Coalition& q,
                                           const Rational& sigma);

// ---------------------------------------------------------------- Delta

// AND terms over num_vars variables, each variable 1 with probability sigma.
struct TermSystem {
  std::uint64_t num_vars = 0;
  std::vector<std::vector<std::uint64_t>> terms;
};

struct DeltaResult {
  Rational delta;
  // overlap_pairs[s]: ordered term pairs (earlier, later) sharing s variables, s >= 1.
  std::vector<std::uint64_t> overlap_pairs;
  // L(C, t) for each term t in order: mass of earlier overlapping terms.
  std::vector<double> term_l;
  std::uint64_t pairs_examined = 0;
};

DeltaResult compute_delta(const TermSystem& system, const Rational& sigma);
// Terms (i, j) for i in T (ascending) and j in [v], i most significant.
DeltaResult compute_delta(const circuit::ResilientCircuit& c, std::span<const std::uint64_t> rows, const Rational& sigma,
                          std::uint64_t pair_cap = 100'000'000);

// ---------------------------------------------------------------- Janson

inline constexpr double kJansonRelativeTruncation = 1e-18;

struct JansonBounds {
  Rational product_lower;
  double lower = 0.0;
  double delta = 0.0;
  double upper = 0.0;
  unsigned ell_used = 0;   // terms of the l-sum evaluated
  unsigned ell_range = 0;  // n, the full range
  double tail_bound = 0.0; // added to upper when the sum was truncated
};

class JansonHypothesisError : public HypothesisError {
 public:
  JansonHypothesisError(const std::string& what, double classical_upper)
      : HypothesisError(what), classical_upper_(classical_upper) {}
  // prod P[C_i=0] * exp(Delta / min P[C_i=0]), valid without the equal-p hypothesis.
  double classical_upper() const noexcept { return classical_upper_; }

 private:
  double classical_upper_;
};

// Requires every P[C_i = 0] equal and >= 1/2.
JansonBounds janson_bounds(std::span<const Rational> zero_probs, const Rational& delta);

// ---------------------------------------------------------------- Bonferroni

struct BonferroniResult {
  unsigned k = 0;
  std::vector<Rational> s;  // s[k] = S_k for k = 1..K (s[0] unused)
  Rational truncated;       // sum_{k < K} (-1)^(k-1) S_k
  Rational error_term;      // S_K
};

using JointProbability = std::function<Rational(std::span<const std::size_t>)>;

BonferroniResult bonferroni_bounds(std::size_t m, unsigned k, const JointProbability& prob_all,
                                   std::uint64_t subset_cap = 2'000'000);

// ---------------------------------------------------------------- sandwich

// P[no term of the rows in T fires], by enumeration over all n bits.
Rational zero_probability(const circuit::ResilientCircuit& c, std::span<const std::uint64_t> rows, const Rational& sigma,
                          unsigned threads = 1);

struct SandwichOptions {
  unsigned exact_bits = 20;  // enumerate P[C_G(T) = 0] when T touches at most this many bits
  std::uint64_t subset_cap = 200'000;
  unsigned threads = 1;
};

struct SandwichLevel {
  unsigned k = 0;
  Rational reference;                  // C(u,k) p^k
  std::optional<Rational> exact;       // E[S_k] when every T was enumerated
  Rational janson_lower;               // = reference
  double janson_upper = 0.0;
  double deviation = 0.0;              // exact (or Janson upper) / reference
  std::uint64_t subsets = 0;
};

struct SandwichReport {
  unsigned k = 0;
  Rational p;       // (1 - sigma^w)^v
  Rational bias;    // (1 - p)^u
  std::vector<SandwichLevel> levels;
  double ec_lower = 0.0;  // bracket on E[C_G] from Bonferroni + Janson
  double ec_upper = 0.0;
  double deviation_bound = 0.0;  // max distance from bias to either end of the bracket
  std::optional<Rational> exact_ec;  // E[C_G] by enumeration when n is small
};

SandwichReport sandwich_bias(const generator::Generator& g, const Rational& sigma, unsigned k,
                             const SandwichOptions& options = {});

}  // namespace resil::analysis
