#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "resil/expander.hpp"
#include "resil/galois.hpp"
#include "resil/numeric.hpp"

namespace resil::generator {

inline constexpr Index kDefaultEnumerationCap = 10'000'000;

// (u, v, w, sigma); the input length is n = v * w, viewed as a v x w matrix
// linearized column-major: cell (row r, column k) is bit k*v + r (0-based).
struct Params {
  Index u = 1;
  std::uint32_t v = 1;
  std::uint32_t w = 1;
  Rational sigma{1, 2};

  std::uint64_t n() const noexcept { return std::uint64_t{v} * w; }
  // u,v,w >= 1 and sigma in (0, 1/2].
  void validate() const;
  // 1 <= w <= v <= u, the regime the resilience and bias bounds address.
  bool standard_regime() const noexcept { return w >= 1 && w <= v && Index{v} <= u; }
};

inline std::uint64_t cell_index(std::uint32_t v, unsigned column, std::uint32_t row) {
  return std::uint64_t{column} * v + row;
}

// One cell per column: S(y, j) has cell (y[k] + j) mod v in column k.
struct BlockSet {
  std::vector<std::uint64_t> cells;
};

BlockSet block_set(const Params& p, std::span<const std::uint32_t> y, std::uint32_t j);

// Everything that determines an explicit walk + Reed-Solomon generator.
struct ExplicitGeneratorPlan {
  std::uint32_t v = 0;
  Rational sigma{1, 2};
  unsigned w = 0;
  unsigned w1 = 0;
  unsigned w2 = 0;
  unsigned c1 = 0;
  double lambda_target = 0.0;  // sigma^2 / 4
  double lambda_base = 1.0;    // estimated expansion of the unpowered base graph
  double lambda_estimated = 1.0;
  unsigned power = 1;
  Index u = 0;
  double ln_u = 0.0;
  unsigned iterations = 0;
  bool from_formula = false;
  std::shared_ptr<const expander::ExpanderGraph> expander;
  std::shared_ptr<const galois::RSCode> rs;

  bool lambda_meets_target() const noexcept { return lambda_estimated <= lambda_target; }
  void validate() const;
};

struct PlanOptions {
  std::optional<unsigned> w;            // override the derived column count
  std::optional<double> lambda_target;  // default sigma^2/4
  expander::LambdaOptions lambda{};
  std::uint64_t degree_cap = expander::kDefaultDegreeCap;
  unsigned max_iterations = 10;
};

// The u <-> w2 fixed point before validation: useful on its own for
// diagnosing parameter choices that cannot be realized.
struct PlanDraft {
  std::uint32_t v = 0;
  Rational sigma{1, 2};
  unsigned c1 = 0;
  unsigned w = 0;
  double lambda_target = 0.0;
  std::optional<double> lambda_base;
  unsigned power = 0;
  std::optional<std::uint64_t> degree;
  std::optional<double> lambda_estimated;
  double ln_degree = 0.0;
  int w1 = 0;
  unsigned w2 = 0;
  double ln_u = 0.0;
  std::optional<Index> u;
  unsigned iterations = 0;
  bool converged = false;
  std::vector<std::string> violations;
  bool resource_violation = false;
};

PlanDraft draft_explicit(std::uint32_t v, const Rational& sigma, unsigned c1, const PlanOptions& options = {});
ExplicitGeneratorPlan plan_explicit(std::uint32_t v, const Rational& sigma, unsigned c1,
                                    const PlanOptions& options = {});
// Desk-scale plan with caller-chosen split and graph power.
ExplicitGeneratorPlan make_plan(std::uint32_t v, const Rational& sigma, unsigned w1, unsigned w2, unsigned c1,
                                unsigned power, const expander::LambdaOptions& lambda = {});

// w2 := floor((c1/3) * max(floor(log2(ln u) / log2(1/sigma)), 4)).
unsigned rs_length_for(double ln_u, const Rational& sigma, unsigned c1);

class Generator {
 public:
  enum class Kind { kTable, kIdentity, kRandom, kWalk, kReedSolomon, kExplicit };

  const Params& params() const noexcept { return params_; }
  Kind kind() const noexcept;
  std::string kind_name() const;

  void row_into(Index i, std::span<std::uint32_t> out) const;
  std::vector<std::uint32_t> row(Index i) const;

  // Row-major u x w table; procedural backends are expanded up to `cap` rows.
  std::vector<std::uint32_t> materialize(Index cap = kDefaultEnumerationCap) const;

  std::optional<std::uint64_t> seed() const;
  const ExplicitGeneratorPlan* plan() const;
  const expander::ExpanderGraph* walk_graph() const;
  const galois::RSCode* rs_code() const;

  static Generator from_table(Params params, std::vector<std::uint32_t> entries);

 private:
  friend Generator build_identity(std::uint32_t, std::uint32_t, const Rational&, Index);
  friend Generator build_random(const Params&, std::uint64_t, Index);
  friend Generator build_walk(std::shared_ptr<const expander::ExpanderGraph>, unsigned, const Rational&);
  friend Generator build_reed_solomon(std::uint32_t, unsigned, unsigned, const Rational&);
  friend Generator build_explicit(const ExplicitGeneratorPlan&);

  struct Table {
    std::vector<std::uint32_t> entries;
  };
  struct Identity {};
  struct Random {
    std::uint64_t seed;
    std::vector<std::uint32_t> entries;
  };
  struct Walk {
    std::shared_ptr<const expander::ExpanderGraph> graph;
  };
  struct ReedSolomon {
    std::shared_ptr<const galois::RSCode> code;
  };
  struct Explicit {
    std::shared_ptr<const ExplicitGeneratorPlan> plan;
  };

  Generator(Params params, std::variant<Table, Identity, Random, Walk, ReedSolomon, Explicit> backend)
      : params_(std::move(params)), backend_(std::move(backend)) {}

  Params params_;
  std::variant<Table, Identity, Random, Walk, ReedSolomon, Explicit> backend_;
};

// u = v^w; row i is the base-v expansion of i, least significant digit first.
Generator build_identity(std::uint32_t v, std::uint32_t w, const Rational& sigma = Rational(1, 2),
                         Index cap = kDefaultEnumerationCap);
// Entries i.i.d. uniform in [v], drawn row-major from substream 0 of `seed`.
Generator build_random(const Params& params, std::uint64_t seed, Index cap = kDefaultEnumerationCap);
// Rows are the length-w walks of `graph`; u = v * d^(w-1).
Generator build_walk(std::shared_ptr<const expander::ExpanderGraph> graph, unsigned w,
                     const Rational& sigma = Rational(1, 2));
// Rows are constant-free RS codewords (degree <= ell, points 1..w); u = v^ell.
Generator build_reed_solomon(std::uint32_t v, unsigned ell, unsigned w, const Rational& sigma = Rational(1, 2));
// Row i = walk decoded from i, followed by the RS codeword of message i.
Generator build_explicit(const ExplicitGeneratorPlan& plan);

// ---------------------------------------------------------------- design

struct DesignOptions {
  Index pair_cap = 50'000'000;  // unordered row pairs examined exactly
  bool allow_sampling = false;
  std::uint64_t samples = 1'000'000;
  double delta = 0.01;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  Index enumeration_cap = kDefaultEnumerationCap;
};

struct DesignWitness {
  Index row_a = 0;
  Index row_b = 0;
  std::uint32_t shift = 0;  // j' - j mod v
};

struct DesignReport {
  unsigned d = 0;
  unsigned max_intersection = 0;
  bool exact = true;
  std::uint64_t pairs_checked = 0;
  std::optional<DesignWitness> witness;
  // Sampled mode: with probability >= 1 - delta, at most this fraction of
  // row pairs exceed the observed maximum intersection.
  double delta = 0.0;
  double unseen_fraction_bound = 0.0;
};

DesignReport check_design(const Generator& g, const DesignOptions& options = {});

// ---------------------------------------------------------------- sampler

enum class TestFamily { kSparseUniform, kColumnSpike, kRowInterval };
std::string to_string(TestFamily family);

// f_1..f_w : [v] -> {0,1}, stored column-major as w bitmaps of length v.
struct TestFunction {
  std::uint32_t v = 0;
  std::uint32_t w = 0;
  std::vector<std::uint8_t> bits;

  bool at(unsigned column, std::uint32_t value) const { return bits[std::size_t{column} * v + value] != 0; }
  std::uint64_t support_size() const;
  // mu = E_{y uniform}[F(y)] = support / v.
  double mean() const { return static_cast<double>(support_size()) / v; }
};

TestFunction draw_test_function(TestFamily family, std::uint32_t v, std::uint32_t w, double mu_cap,
                                std::uint64_t master_seed, std::uint64_t trial);

// E_{i in [u]}[alpha^F(G(i)) * 1{F(G(i)) != 0}] over every index of g.
double sampler_moment(const Generator& g, const TestFunction& f, double alpha,
                      Index enumeration_cap = kDefaultEnumerationCap);

struct SamplerOptions {
  double alpha = 2.0;
  double beta = 1.0;
  std::uint64_t trials = 1000;
  std::optional<double> mu_cap;  // default 1/alpha
  std::uint64_t seed = 1;
  double k_constant = 16.0;
  std::vector<TestFamily> families{TestFamily::kSparseUniform, TestFamily::kColumnSpike,
                                   TestFamily::kRowInterval};
  unsigned threads = 1;
  Index enumeration_cap = kDefaultEnumerationCap;
};

struct SamplerTestResult {
  std::uint64_t trial = 0;
  TestFamily family = TestFamily::kSparseUniform;
  std::uint64_t support = 0;
  double mu = 0.0;
  double moment = 0.0;
  double ratio = 0.0;
};

struct SamplerReport {
  double alpha = 0.0;
  double beta = 0.0;
  double k_constant = 0.0;
  double mu_cap = 0.0;
  std::uint64_t trials = 0;
  double worst_ratio = 0.0;
  SamplerTestResult worst;
  std::vector<SamplerTestResult> violations;
  std::string method;

  bool passes() const noexcept { return worst_ratio <= k_constant * beta; }
};

SamplerReport check_sampler(const Generator& g, const SamplerOptions& options = {});

// ---------------------------------------------------------------- search

struct SearchOptions {
  SearchOptions() { sampler.trials = 200; }
  unsigned max_attempts = 50;
  DesignOptions design{};
  SamplerOptions sampler{};
};

struct SearchResult {
  Generator generator;
  unsigned attempts = 0;
  std::uint64_t attempt_seed = 0;
  DesignReport design;
  SamplerReport sampler;
};

class SearchFailure : public std::runtime_error {
 public:
  SearchFailure(const std::string& what, std::optional<SearchResult> best, bool certified)
      : std::runtime_error(what), best_(std::move(best)), certified_(certified) {}
  const std::optional<SearchResult>& best() const noexcept { return best_; }
  // True when no generator with these parameters can meet the design target.
  bool certified() const noexcept { return certified_; }

 private:
  std::optional<SearchResult> best_;
  bool certified_;
};

SearchResult search_random(const Params& params, unsigned d_target, std::uint64_t seed,
                           const SearchOptions& options = {});

// ---------------------------------------------------------------- files

// "RESGEN 1" tables and "RESGEN-PLAN 1" procedural descriptions.
void serialize(const Generator& g, std::ostream& out, bool force_table = false);
Generator deserialize(std::istream& in);

}  // namespace resil::generator
