#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "resil/numeric.hpp"

namespace resil::expander {

inline constexpr std::uint64_t kDefaultDegreeCap = std::uint64_t{1} << 62;

// A d-regular multigraph given by a base neighbor table (v x d0) raised to a
// power k: label l in [d0^k] is read as k base labels, least significant first,
// each taken as one step. Immutable once built.
class ExpanderGraph {
 public:
  static ExpanderGraph from_table(std::uint32_t num_vertices, std::uint32_t degree,
                                  std::vector<std::uint32_t> table, std::string name = "table");

  std::uint32_t num_vertices() const noexcept { return num_vertices_; }
  std::uint64_t degree() const noexcept { return degree_; }
  std::uint32_t base_degree() const noexcept { return base_degree_; }
  unsigned exponent() const noexcept { return exponent_; }
  const std::string& name() const noexcept { return name_; }

  std::uint32_t neighbor(std::uint32_t vertex, std::uint64_t label) const;
  std::uint32_t base_neighbor(std::uint32_t vertex, std::uint32_t label) const {
    return table_[std::size_t{vertex} * base_degree_ + label];
  }

  // out[x] = (1/d) sum_l in[neighbor(x, l)]  (the normalized walk matrix).
  void apply_walk(std::span<const double> in, std::span<double> out) const;
  // Transpose of apply_walk: out[y] = (1/d) sum_{(x,l): neighbor(x,l)=y} in[x].
  void apply_walk_transpose(std::span<const double> in, std::span<double> out) const;

  std::optional<double> lambda_claimed() const noexcept { return lambda_claimed_; }
  std::optional<double> lambda_estimated() const noexcept { return lambda_estimated_; }
  ExpanderGraph with_lambda_estimate(double lambda) const;

 private:
  friend ExpanderGraph power(const ExpanderGraph& g, unsigned k, std::uint64_t degree_cap);

  ExpanderGraph() = default;

  std::uint32_t num_vertices_ = 0;
  std::uint32_t base_degree_ = 0;
  unsigned exponent_ = 1;
  std::uint64_t degree_ = 0;
  std::vector<std::uint32_t> table_;
  std::string name_;
  std::optional<double> lambda_claimed_;
  std::optional<double> lambda_estimated_;
};

// x -> x+1, x-1, x^{-1} on Z_v (inv(0) = 0). Requires prime v >= 5.
ExpanderGraph build_shift_inverse(std::uint32_t v);
ExpanderGraph complete_graph(std::uint32_t v, bool self_loops);
ExpanderGraph cycle_graph(std::uint32_t v);

// k-step label-path composition; degree d^k must stay within degree_cap.
ExpanderGraph power(const ExpanderGraph& g, unsigned k, std::uint64_t degree_cap = kDefaultDegreeCap);

// In-degree check: every vertex is hit by exactly d (vertex, label) pairs.
bool is_regular(const ExpanderGraph& g);

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_estimate, std::size_t iterations)
      : std::runtime_error(what), last_estimate_(last_estimate), iterations_(iterations) {}
  double last_estimate() const noexcept { return last_estimate_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double last_estimate_;
  std::size_t iterations_;
};

struct LambdaOptions {
  double tol = 1e-9;
  std::uint64_t seed = 0x5eed;
  std::size_t max_iterations = 200000;
};

inline constexpr std::uint32_t kMaxEstimationVertices = 100000;

// Second-largest singular value of the normalized walk matrix, by power
// iteration on P^T P restricted to the complement of the uniform vector.
double estimate_lambda(const ExpanderGraph& g, const LambdaOptions& options = {});

// Smallest power k whose estimated expansion is <= target, with the estimate
// attached to the returned graph.
struct PoweredExpander {
  ExpanderGraph graph;
  unsigned power = 1;
  double base_lambda = 1.0;
};
PoweredExpander power_to_target(const ExpanderGraph& base, double lambda_target,
                                const LambdaOptions& options = {},
                                std::uint64_t degree_cap = kDefaultDegreeCap);

// Walk index in [v * d^(w1-1)]: start most significant, then labels in order.
struct WalkIndex {
  std::uint32_t start = 0;
  std::vector<std::uint64_t> labels;

  static WalkIndex decode(Index i, std::uint32_t num_vertices, std::uint64_t degree, unsigned length);
  Index encode(std::uint64_t degree) const;
};

// Walk index space size v * d^(length-1); throws ResourceError on overflow.
Index walk_index_space(std::uint32_t num_vertices, std::uint64_t degree, unsigned length);

// Vertices visited: start, then one vertex per label.
std::vector<std::uint32_t> walk(const ExpanderGraph& g, const WalkIndex& index);
void walk_into(const ExpanderGraph& g, const WalkIndex& index, std::span<std::uint32_t> out);

}  // namespace resil::expander
