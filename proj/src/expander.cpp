#include "resil/expander.hpp"

#include <cmath>
#include <numeric>

#include "resil/errors.hpp"
#include "resil/galois.hpp"
#include "resil/rng.hpp"

namespace resil::expander {

ExpanderGraph ExpanderGraph::from_table(std::uint32_t num_vertices, std::uint32_t degree,
                                        std::vector<std::uint32_t> table, std::string name) {
  if (num_vertices == 0 || degree == 0) throw InputError("graph needs at least one vertex and label");
  if (table.size() != std::size_t{num_vertices} * degree) throw InputError("neighbor table has wrong size");
  for (auto y : table) {
    if (y >= num_vertices) throw InputError("neighbor table entry outside the vertex set");
  }
  ExpanderGraph g;
  g.num_vertices_ = num_vertices;
  g.base_degree_ = degree;
  g.exponent_ = 1;
  g.degree_ = degree;
  g.table_ = std::move(table);
  g.name_ = std::move(name);
  return g;
}

std::uint32_t ExpanderGraph::neighbor(std::uint32_t vertex, std::uint64_t label) const {
  if (vertex >= num_vertices_) throw InputError("vertex out of range");
  if (label >= degree_) throw InputError("edge label out of range");
  std::uint32_t x = vertex;
  for (unsigned step = 0; step < exponent_; ++step) {
    x = base_neighbor(x, static_cast<std::uint32_t>(label % base_degree_));
    label /= base_degree_;
  }
  return x;
}

void ExpanderGraph::apply_walk(std::span<const double> in, std::span<double> out) const {
  const std::size_t v = num_vertices_;
  std::vector<double> cur(in.begin(), in.end());
  std::vector<double> next(v);
  const double scale = 1.0 / base_degree_;
  for (unsigned step = 0; step < exponent_; ++step) {
    for (std::size_t x = 0; x < v; ++x) {
      double acc = 0.0;
      const std::uint32_t* row = &table_[x * base_degree_];
      for (std::uint32_t l = 0; l < base_degree_; ++l) acc += cur[row[l]];
      next[x] = acc * scale;
    }
    cur.swap(next);
  }
  std::copy(cur.begin(), cur.end(), out.begin());
}

void ExpanderGraph::apply_walk_transpose(std::span<const double> in, std::span<double> out) const {
  const std::size_t v = num_vertices_;
  std::vector<double> cur(in.begin(), in.end());
  std::vector<double> next(v);
  const double scale = 1.0 / base_degree_;
  for (unsigned step = 0; step < exponent_; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t x = 0; x < v; ++x) {
      const double share = cur[x] * scale;
      const std::uint32_t* row = &table_[x * base_degree_];
      for (std::uint32_t l = 0; l < base_degree_; ++l) next[row[l]] += share;
    }
    cur.swap(next);
  }
  std::copy(cur.begin(), cur.end(), out.begin());
}

ExpanderGraph ExpanderGraph::with_lambda_estimate(double lambda) const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("lambda estimate must lie in [0,1]");
  ExpanderGraph g = *this;
  g.lambda_estimated_ = lambda;
  return g;
}

ExpanderGraph build_shift_inverse(std::uint32_t v) {
  if (v < 5) throw InputError("shift-inverse graph needs v >= 5");
  const galois::PrimeField field(v);
  std::vector<std::uint32_t> table(std::size_t{v} * 3);
  for (std::uint32_t x = 0; x < v; ++x) {
    table[std::size_t{x} * 3 + 0] = field.add(x, 1);
    table[std::size_t{x} * 3 + 1] = field.sub(x, 1);
    table[std::size_t{x} * 3 + 2] = field.inv(x);
  }
  return ExpanderGraph::from_table(v, 3, std::move(table), "shift-inverse");
}

ExpanderGraph complete_graph(std::uint32_t v, bool self_loops) {
  const std::uint32_t d = self_loops ? v : v - 1;
  std::vector<std::uint32_t> table;
  table.reserve(std::size_t{v} * d);
  for (std::uint32_t x = 0; x < v; ++x) {
    for (std::uint32_t y = 0; y < v; ++y) {
      if (y != x || self_loops) table.push_back(y);
    }
  }
  return ExpanderGraph::from_table(v, d, std::move(table), self_loops ? "complete+loops" : "complete");
}

ExpanderGraph cycle_graph(std::uint32_t v) {
  std::vector<std::uint32_t> table(std::size_t{v} * 2);
  for (std::uint32_t x = 0; x < v; ++x) {
    table[std::size_t{x} * 2] = (x + 1) % v;
    table[std::size_t{x} * 2 + 1] = (x + v - 1) % v;
  }
  return ExpanderGraph::from_table(v, 2, std::move(table), "cycle");
}

ExpanderGraph power(const ExpanderGraph& g, unsigned k, std::uint64_t degree_cap) {
  if (k < 1) throw InputError("graph power must be >= 1");
  const unsigned exponent = g.exponent_ * k;
  std::uint64_t degree = 1;
  for (unsigned i = 0; i < exponent; ++i) {
    if (degree > degree_cap / g.base_degree_) {
      throw ResourceError("degree " + std::to_string(g.base_degree_) + "^" + std::to_string(exponent) +
                          " exceeds the configured cap");
    }
    degree *= g.base_degree_;
  }
  ExpanderGraph out = g;
  out.exponent_ = exponent;
  out.degree_ = degree;
  out.lambda_claimed_.reset();
  out.lambda_estimated_.reset();
  return out;
}

bool is_regular(const ExpanderGraph& g) {
  const std::uint32_t v = g.num_vertices();
  std::vector<std::uint64_t> indegree(v, 0);
  for (std::uint32_t x = 0; x < v; ++x) {
    for (std::uint32_t l = 0; l < g.base_degree(); ++l) ++indegree[g.base_neighbor(x, l)];
  }
  for (auto c : indegree) {
    if (c != g.base_degree()) return false;
  }
  if (g.exponent() == 1) return true;
  // Powered graph: push the all-ones in-degree profile through k steps.
  std::vector<double> ones(v, 1.0), out(v);
  g.apply_walk_transpose(ones, out);
  for (double c : out) {
    if (std::abs(c - 1.0) > 1e-9) return false;
  }
  return true;
}

namespace {

void remove_mean(std::vector<double>& x) {
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  for (auto& e : x) e -= mean;
}

double norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double e : x) s += e * e;
  return std::sqrt(s);
}

}  // namespace

double estimate_lambda(const ExpanderGraph& g, const LambdaOptions& options) {
  const std::uint32_t v = g.num_vertices();
  if (v > kMaxEstimationVertices) throw ResourceError("estimate_lambda supports at most 1e5 vertices");
  if (!(options.tol > 0.0)) throw InputError("tolerance must be positive");
  if (v == 1) return 0.0;

  RandomStream rng(options.seed);
  std::vector<double> x(v), y(v), z(v);
  for (auto& e : x) e = static_cast<double>(rng.word() >> 11) * 0x1.0p-53 - 0.5;
  remove_mean(x);
  double nx = norm(x);
  for (auto& e : x) e /= nx;

  double rho = 0.0;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    g.apply_walk(x, y);
    g.apply_walk_transpose(y, z);
    remove_mean(z);
    rho = 0.0;
    for (std::uint32_t i = 0; i < v; ++i) rho += x[i] * z[i];
    double residual = 0.0;
    for (std::uint32_t i = 0; i < v; ++i) {
      const double r = z[i] - rho * x[i];
      residual += r * r;
    }
    residual = std::sqrt(residual);
    const double nz = norm(z);
    if (nz <= options.tol * options.tol) return 0.0;
    const double root = std::sqrt(std::max(rho, 0.0));
    // |rho - mu| <= residual for some eigenvalue mu of P^T P, hence
    // |sqrt(rho) - sqrt(mu)| <= residual / sqrt(rho).
    if (it > 1 && residual <= options.tol * std::max(root, options.tol)) return std::min(root, 1.0);
    for (std::uint32_t i = 0; i < v; ++i) x[i] = z[i] / nz;
  }
  throw ConvergenceError("estimate_lambda did not converge", std::sqrt(std::max(rho, 0.0)),
                         options.max_iterations);
}

PoweredExpander power_to_target(const ExpanderGraph& base, double lambda_target, const LambdaOptions& options,
                                std::uint64_t degree_cap) {
  if (!(lambda_target > 0.0 && lambda_target < 1.0)) throw InputError("lambda target must lie in (0,1)");
  const double base_lambda = estimate_lambda(base, options);
  if (base_lambda >= 1.0 - 1e-12) throw ParameterError("base graph has lambda = 1 (disconnected or bipartite)");
  unsigned k = 1;
  if (base_lambda > lambda_target) {
    k = static_cast<unsigned>(std::ceil(std::log(lambda_target) / std::log(base_lambda) - 1e-12));
    k = std::max(k, 1U);
  }
  for (;; ++k) {
    ExpanderGraph candidate = power(base, k, degree_cap);
    const double lambda = estimate_lambda(candidate, options);
    if (lambda <= lambda_target) {
      return PoweredExpander{candidate.with_lambda_estimate(lambda), k, base_lambda};
    }
  }
}

Index walk_index_space(std::uint32_t num_vertices, std::uint64_t degree, unsigned length) {
  if (length < 1) throw InputError("walk length must be >= 1");
  Index labels = 0;
  Index out = 0;
  if (!checked_pow(degree, length - 1, labels) || !checked_mul(labels, num_vertices, out)) {
    throw ResourceError("walk index space v*d^(w1-1) exceeds 128 bits");
  }
  return out;
}

WalkIndex WalkIndex::decode(Index i, std::uint32_t num_vertices, std::uint64_t degree, unsigned length) {
  if (i >= walk_index_space(num_vertices, degree, length)) {
    throw InputError("walk index " + index_to_string(i) + " out of range");
  }
  WalkIndex out;
  out.labels.resize(length - 1);
  for (std::size_t t = out.labels.size(); t-- > 0;) {
    out.labels[t] = static_cast<std::uint64_t>(i % degree);
    i /= degree;
  }
  out.start = static_cast<std::uint32_t>(i);
  return out;
}

Index WalkIndex::encode(std::uint64_t degree) const {
  Index out = start;
  for (auto l : labels) {
    if (l >= degree) throw InputError("walk label out of range");
    out = out * degree + l;
  }
  return out;
}

void walk_into(const ExpanderGraph& g, const WalkIndex& index, std::span<std::uint32_t> out) {
  if (out.size() != index.labels.size() + 1) throw InputError("walk buffer has wrong length");
  if (index.start >= g.num_vertices()) throw InputError("walk start out of range");
  std::uint32_t x = index.start;
  out[0] = x;
  for (std::size_t t = 0; t < index.labels.size(); ++t) {
    x = g.neighbor(x, index.labels[t]);
    out[t + 1] = x;
  }
}

std::vector<std::uint32_t> walk(const ExpanderGraph& g, const WalkIndex& index) {
  std::vector<std::uint32_t> out(index.labels.size() + 1);
  walk_into(g, index, out);
  return out;
}

}  // namespace resil::expander
