#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resil/generator.hpp"
#include "resil/numeric.hpp"

namespace resil::circuit {

enum class Ternary : std::uint8_t { kZero, kOne, kUnknown };

Ternary t_and(Ternary a, Ternary b);
Ternary t_or(Ternary a, Ternary b);
Ternary t_not(Ternary a);
std::string to_string(Ternary t);

// A sorted set of input positions left unset.
class Coalition {
 public:
  Coalition() = default;
  Coalition(std::uint64_t n, std::vector<std::uint64_t> positions);

  std::uint64_t num_inputs() const noexcept { return n_; }
  std::size_t size() const noexcept { return positions_.size(); }
  bool empty() const noexcept { return positions_.empty(); }
  const std::vector<std::uint64_t>& positions() const noexcept { return positions_; }
  bool contains(std::uint64_t position) const;
  // Positions in [offset, offset + length), shifted down by offset.
  Coalition restrict(std::uint64_t offset, std::uint64_t length) const;
  // Positions outside the coalition, ascending.
  std::vector<std::uint64_t> complement() const;

  static Coalition prefix(std::uint64_t n, std::uint64_t q);
  static Coalition random(std::uint64_t n, std::uint64_t q, std::uint64_t seed);
  // Round-robin over the w columns of a v x w column-major matrix.
  static Coalition per_column(std::uint32_t v, std::uint32_t w, std::uint64_t q);

 private:
  std::uint64_t n_ = 0;
  std::vector<std::uint64_t> positions_;
};

// Bit values for every input; coalition positions carry no value.
struct Assignment {
  std::vector<std::uint8_t> bits;
  Coalition unset;
};

// 64 lanes of a three-valued result; `value` is meaningful where !unknown.
struct TernaryWords {
  std::uint64_t unknown = 0;
  std::uint64_t value = 0;
};

inline constexpr unsigned kMaxCompletionBits = 20;

class BooleanFunction {
 public:
  virtual ~BooleanFunction() = default;
  virtual std::uint64_t num_inputs() const = 0;
  virtual bool is_monotone() const = 0;
  virtual std::string name() const = 0;
  // inputs[k] holds bit k for 64 independent lanes.
  virtual std::uint64_t eval_words(std::span<const std::uint64_t> inputs) const = 0;
  // Which lanes are fixed regardless of the coalition bits, and to what.
  // Monotone functions compare the all-0 and all-1 completions; others
  // enumerate every completion (up to kMaxCompletionBits free bits).
  virtual TernaryWords eval_ternary_words(std::span<const std::uint64_t> inputs, const Coalition& q) const;
  // Exact P[f = 1] under B_sigma when a closed form is known.
  virtual std::optional<Rational> closed_form_bias(const Rational& sigma) const;

  bool eval(std::span<const std::uint8_t> bits) const;
  Ternary eval(const Assignment& a) const;
};

using FunctionPtr = std::shared_ptr<const BooleanFunction>;

// AND over rows i, OR over shifts j, AND over the w cells of S(G(i), j).
// Terms are kept in (i, j) order, duplicates included.
class ResilientCircuit final : public BooleanFunction {
 public:
  explicit ResilientCircuit(const generator::Generator& g, Index term_cell_cap = 200'000'000);

  const generator::Params& params() const noexcept { return params_; }
  std::uint64_t num_rows() const noexcept { return rows_; }
  std::uint64_t num_terms() const noexcept { return rows_ * params_.v; }
  std::span<const std::uint64_t> term(std::uint64_t i, std::uint32_t j) const {
    return {cells_.data() + (i * params_.v + j) * params_.w, params_.w};
  }

  std::uint64_t num_inputs() const override { return params_.n(); }
  bool is_monotone() const override { return true; }
  std::string name() const override;
  std::uint64_t eval_words(std::span<const std::uint64_t> inputs) const override;
  // Read-once (u = 1): 1 - (1 - sigma^w)^v.
  std::optional<Rational> closed_form_bias(const Rational& sigma) const override;

 private:
  generator::Params params_;
  std::uint64_t rows_;
  std::vector<std::uint64_t> cells_;
};

std::shared_ptr<const ResilientCircuit> build_circuit(const generator::Generator& g);
// Read-once OR of v ANDs of width w: the u = 1 circuit for the all-zero row.
std::shared_ptr<const ResilientCircuit> make_tribes(std::uint32_t v, std::uint32_t w);
// OR of t bits.
std::shared_ptr<const ResilientCircuit> make_or(std::uint32_t t);

class Majority final : public BooleanFunction {
 public:
  explicit Majority(std::uint64_t n);
  std::uint64_t num_inputs() const override { return n_; }
  bool is_monotone() const override { return true; }
  std::string name() const override { return "majority:" + std::to_string(n_); }
  std::uint64_t eval_words(std::span<const std::uint64_t> inputs) const override;
  std::optional<Rational> closed_form_bias(const Rational& sigma) const override;

 private:
  std::uint64_t n_;
};

class RecursiveMajority3 final : public BooleanFunction {
 public:
  explicit RecursiveMajority3(unsigned depth);
  unsigned depth() const noexcept { return depth_; }
  std::uint64_t num_inputs() const override { return n_; }
  bool is_monotone() const override { return true; }
  std::string name() const override { return "recmaj3:" + std::to_string(depth_); }
  std::uint64_t eval_words(std::span<const std::uint64_t> inputs) const override;
  std::optional<Rational> closed_form_bias(const Rational& sigma) const override;

 private:
  unsigned depth_;
  std::uint64_t n_;
};

class Constant final : public BooleanFunction {
 public:
  Constant(std::uint64_t n, bool value) : n_(n), value_(value) {}
  std::uint64_t num_inputs() const override { return n_; }
  bool is_monotone() const override { return true; }
  std::string name() const override { return value_ ? "one" : "zero"; }
  std::uint64_t eval_words(std::span<const std::uint64_t>) const override { return value_ ? ~0ULL : 0ULL; }
  std::optional<Rational> closed_form_bias(const Rational&) const override { return Rational(value_ ? 1 : 0); }

 private:
  std::uint64_t n_;
  bool value_;
};

// "majority:n", "tribes:v:w", "recmaj3:d", "or:t".
FunctionPtr make_baseline(const std::string& spec);

// ------------------------------------------------------------- enumeration

inline constexpr unsigned kDefaultEnumerationBits = 24;

// hist[k] = number of assignments to `free_positions` with k ones on which
// lanes_of(inputs) is set. Positions not listed stay as given in `base`.
std::vector<std::uint64_t> popcount_histogram(
    std::span<const std::uint64_t> base, std::span<const std::uint64_t> free_positions,
    const std::function<std::uint64_t(std::span<const std::uint64_t>)>& lanes_of, unsigned threads = 1);

// sum_k hist[k] sigma^k (1 - sigma)^(m - k), m = hist.size() - 1.
Rational weigh_histogram(std::span<const std::uint64_t> hist, const Rational& sigma);

// P[f = 1] under B_sigma, exactly: closed form when available, otherwise
// enumeration of all 2^n inputs (n <= max_bits).
Rational exact_bias(const BooleanFunction& f, const Rational& sigma, unsigned max_bits = kDefaultEnumerationBits,
                    unsigned threads = 1);

struct Estimate {
  double point = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

inline constexpr std::uint64_t kWordsPerBlock = 1024;

// Draws inputs ~ B_sigma in blocks of kWordsPerBlock words; block b uses
// substream b of `seed`, so the result does not depend on `threads`.
// count_lanes(inputs, lane_mask) returns how many lanes are "hits".
Estimate monte_carlo(std::uint64_t n, const Rational& sigma, std::uint64_t samples, std::uint64_t seed,
                     unsigned threads,
                     const std::function<std::uint64_t(std::span<std::uint64_t>, std::uint64_t)>& count_lanes);

Estimate mc_bias(const BooleanFunction& f, const Rational& sigma, std::uint64_t samples, std::uint64_t seed,
                 unsigned threads = 1);

}  // namespace resil::circuit
