#include "resil/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mpfr.h>

#include "resil/parallel.hpp"

namespace resil::analysis {

using circuit::BooleanFunction;
using circuit::Coalition;
using circuit::ResilientCircuit;

// ---------------------------------------------------------------- bias

namespace {

void check_sigma_open(const Rational& sigma) {
  if (!(sigma > 0 && sigma < 1)) throw InputError("sigma must lie in (0, 1)");
}

std::uint64_t bit_length(const BigInt& x) { return mpz_sizeinbase(x.get_mpz_t(), 2); }

class Mpfr {
 public:
  explicit Mpfr(unsigned bits) { mpfr_init2(x_, bits); }
  ~Mpfr() { mpfr_clear(x_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_ptr get() { return x_; }

 private:
  mpfr_t x_;
};

// One end of the interval: `down` selects the rounding that keeps the
// final result a lower bound.
double bias_end(Index u, std::uint64_t v, std::uint64_t w, const Rational& sigma, bool down, unsigned bits) {
  const mpfr_rnd_t toward = down ? MPFR_RNDD : MPFR_RNDU;
  const mpfr_rnd_t away = down ? MPFR_RNDU : MPFR_RNDD;
  Mpfr a(bits), b(bits), c(bits);
  // result increases with sigma^w, so sigma^w rounds with the result
  mpfr_set_q(a.get(), sigma.get_mpq_t(), toward);
  mpfr_pow_ui(a.get(), a.get(), w, toward);
  mpfr_ui_sub(b.get(), 1, a.get(), away);
  mpfr_pow_ui(b.get(), b.get(), v, away);
  mpfr_ui_sub(c.get(), 1, b.get(), toward);
  const BigInt exponent = to_bigint(u);
  mpfr_pow_z(c.get(), c.get(), exponent.get_mpz_t(), toward);
  return mpfr_get_d(c.get(), toward);
}

}  // namespace

BiasValue bias_formula(Index u, std::uint64_t v, std::uint64_t w, const Rational& sigma, std::uint64_t exact_bit_limit) {
  if (u < 1 || v < 1 || w < 1) throw InputError("u, v and w must be at least 1");
  check_sigma_open(sigma);
  BiasValue out;
  const double den_bits = static_cast<double>(bit_length(sigma.get_den()) + 1);
  const double size = static_cast<double>(u) * static_cast<double>(v) * static_cast<double>(w) * den_bits;
  if (size <= static_cast<double>(exact_bit_limit)) {
    const Rational value = pow(1 - pow(1 - pow(sigma, w), v), static_cast<unsigned long>(u));
    out.exact = value;
    out.point = out.lower = out.upper = to_double(value);
    return out;
  }
  out.precision_bits = 256;
  out.lower = bias_end(u, v, w, sigma, true, out.precision_bits);
  out.upper = bias_end(u, v, w, sigma, false, out.precision_bits);
  out.point = 0.5 * (out.lower + out.upper);
  return out;
}

BiasTarget solve_v(Index u, unsigned w, const Rational& sigma, double constant) {
  if (u < 1 || w < 1) throw InputError("u and w must be at least 1");
  if (!(sigma > 0 && sigma <= Rational(1, 2))) throw InputError("sigma must lie in (0, 1/2]");
  BiasTarget t;
  t.u = u;
  t.w = w;
  t.sigma = sigma;
  const long double inv_sigma_w = std::pow(1.0L / static_cast<long double>(to_double(sigma)), static_cast<long double>(w));
  const long double log_term = std::log(static_cast<long double>(u)) - std::log(std::log(2.0L));
  t.v_real = static_cast<double>(inv_sigma_w * log_term);
  if (!(t.v_real >= w)) {
    throw ParameterError("sigma^-w ln(u/ln 2) = " + std::to_string(t.v_real) + " is below w = " + std::to_string(w) +
                         "; no admissible v");
  }
  t.v = static_cast<std::uint64_t>(std::ceil(inv_sigma_w * log_term));
  if (!(t.v >= t.v_real && t.v <= t.v_real + 1)) throw ParameterError("solved v falls outside its interval");
  t.bias = bias_formula(u, t.v, w, sigma);
  t.residual = std::max(std::abs(t.bias.lower - 0.5), std::abs(t.bias.upper - 0.5));
  t.residual_bound = constant * std::pow(to_double(sigma), w);
  t.within_bound = t.residual <= t.residual_bound;
  return t;
}

// ---------------------------------------------------------------- influence

std::string to_string(InfluenceMode mode) {
  switch (mode) {
    case InfluenceMode::kExact: return "exact";
    case InfluenceMode::kMonteCarlo: return "monte-carlo";
    case InfluenceMode::kAnalyticUpper: return "analytic-upper";
  }
  return "unknown";
}

namespace {

void check_coalition(const BooleanFunction& f, const Coalition& q) {
  if (q.num_inputs() != f.num_inputs()) throw InputError("coalition is over a different number of inputs");
}

}  // namespace

InfluenceEstimate influence_exact(const BooleanFunction& f, const Coalition& q, const Rational& sigma,
                                  unsigned max_free_bits, unsigned threads) {
  check_coalition(f, q);
  if (!(sigma >= 0 && sigma <= 1)) throw InputError("sigma must lie in [0, 1]");
  const std::uint64_t free_bits = f.num_inputs() - q.size();
  if (free_bits > max_free_bits) {
    throw ResourceError("exact influence needs n - |Q| <= " + std::to_string(max_free_bits) + ", got " +
                        std::to_string(free_bits));
  }
  const std::vector<std::uint64_t> base(f.num_inputs(), 0);
  const auto free = q.complement();
  const auto hist = circuit::popcount_histogram(
      base, free, [&](std::span<const std::uint64_t> x) { return f.eval_ternary_words(x, q).unknown; }, threads);
  InfluenceEstimate out;
  out.mode = InfluenceMode::kExact;
  out.exact = circuit::weigh_histogram(hist, sigma);
  out.point = to_double(*out.exact);
  return out;
}

InfluenceEstimate influence_mc(const BooleanFunction& f, const Coalition& q, const Rational& sigma,
                               std::uint64_t samples, std::uint64_t seed, unsigned threads) {
  check_coalition(f, q);
  const auto e = circuit::monte_carlo(f.num_inputs(), sigma, samples, seed, threads,
                                      [&](std::span<std::uint64_t> x, std::uint64_t mask) {
                                        return static_cast<std::uint64_t>(
                                            std::popcount(f.eval_ternary_words(x, q).unknown & mask));
                                      });
  InfluenceEstimate out;
  out.mode = InfluenceMode::kMonteCarlo;
  out.point = e.point;
  out.std_error = e.std_error;
  out.samples = e.samples;
  return out;
}

InfluenceEstimate influence_analytic_bound(const ResilientCircuit& c, const Coalition& q, const Rational& sigma) {
  if (q.num_inputs() != c.num_inputs()) throw InputError("coalition is over a different number of inputs");
  const std::uint32_t v = c.params().v;
  const std::uint32_t w = c.params().w;
  std::vector<std::uint8_t> in_q(c.num_inputs(), 0);
  for (auto p : q.positions()) in_q[p] = 1;

  std::vector<Rational> sigma_pow(w + 1);
  for (unsigned s = 0; s <= w; ++s) sigma_pow[s] = pow(sigma, s);
  const Rational miss = 1 - sigma_pow[w];
  std::vector<std::optional<Rational>> miss_pow(v + 1);

  Rational total = 0;
  for (std::uint64_t i = 0; i < c.num_rows(); ++i) {
    unsigned hit = 0;
    Rational f_sum = 0;
    for (std::uint32_t j = 0; j < v; ++j) {
      unsigned s = 0;
      for (auto cell : c.term(i, j)) s += in_q[cell];
      if (s == 0) continue;
      ++hit;
      f_sum += sigma_pow[w - s];
    }
    if (hit == 0) continue;
    if (f_sum > 1) f_sum = 1;
    auto& e = miss_pow[v - hit];
    if (!e) e = pow(miss, v - hit);
    total += *e * f_sum;
  }
  InfluenceEstimate out;
  out.mode = InfluenceMode::kAnalyticUpper;
  out.exact = total;
  out.point = to_double(total);
  return out;
}

// ---------------------------------------------------------------- Delta

namespace {

Rational weigh_powers(const std::vector<std::uint64_t>& counts, const Rational& sigma) {
  Rational total = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k]) total += Rational(BigInt(std::to_string(counts[k]))) * pow(sigma, k);
  }
  return total;
}

}  // namespace

DeltaResult compute_delta(const TermSystem& system, const Rational& sigma) {
  std::vector<std::vector<std::uint64_t>> terms = system.terms;
  std::size_t widest = 0;
  for (auto& t : terms) {
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    if (!t.empty() && t.back() >= system.num_vars) throw InputError("term uses a variable outside the system");
    widest = std::max(widest, t.size());
  }
  DeltaResult out;
  out.overlap_pairs.assign(widest + 1, 0);
  out.term_l.assign(terms.size(), 0.0);
  std::vector<std::uint64_t> by_union(2 * widest + 1, 0);
  const double s = to_double(sigma);
  for (std::size_t b = 0; b < terms.size(); ++b) {
    for (std::size_t a = 0; a < b; ++a) {
      ++out.pairs_examined;
      std::size_t common = 0;
      auto x = terms[a].begin(), y = terms[b].begin();
      while (x != terms[a].end() && y != terms[b].end()) {
        if (*x == *y) {
          ++common, ++x, ++y;
        } else if (*x < *y) {
          ++x;
        } else {
          ++y;
        }
      }
      if (common == 0) continue;
      const std::size_t uni = terms[a].size() + terms[b].size() - common;
      ++out.overlap_pairs[common];
      ++by_union[uni];
      out.term_l[b] += std::pow(s, static_cast<double>(uni));
    }
  }
  out.delta = weigh_powers(by_union, sigma);
  return out;
}

DeltaResult compute_delta(const ResilientCircuit& c, std::span<const std::uint64_t> rows, const Rational& sigma,
                          std::uint64_t pair_cap) {
  const std::uint32_t v = c.params().v;
  const std::uint32_t w = c.params().w;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t] >= c.num_rows()) throw InputError("row index outside [0, u)");
    if (t > 0 && rows[t] <= rows[t - 1]) throw InputError("row subset must be strictly increasing");
  }
  const double work = static_cast<double>(rows.size()) * static_cast<double>(rows.size()) * v;
  if (work > static_cast<double>(pair_cap)) throw ResourceError("Delta over this subset exceeds the pair budget");

  // Row i's generator entries, read back from its j = 0 term.
  auto entries = [&](std::uint64_t i) {
    std::vector<std::uint32_t> y(w);
    const auto t = c.term(i, 0);
    for (unsigned k = 0; k < w; ++k) y[k] = static_cast<std::uint32_t>(t[k] - std::uint64_t{k} * v);
    return y;
  };
  std::vector<std::vector<std::uint32_t>> ys;
  for (auto i : rows) ys.push_back(entries(i));

  DeltaResult out;
  out.overlap_pairs.assign(w + 1, 0);
  out.term_l.assign(rows.size() * v, 0.0);
  const double s = to_double(sigma);
  std::vector<std::uint32_t> h(v);
  for (std::size_t b = 0; b < rows.size(); ++b) {
    double row_l = 0.0;
    for (std::size_t a = 0; a < b; ++a) {
      // |S(y_a, j') ∩ S(y_b, j)| = #{k : y_a[k] - y_b[k] = j - j'}; each
      // difference value is realized by v ordered (j', j) pairs.
      std::fill(h.begin(), h.end(), 0U);
      for (unsigned k = 0; k < w; ++k) ++h[(ys[a][k] + v - ys[b][k]) % v];
      for (std::uint32_t d = 0; d < v; ++d) {
        if (h[d] == 0) continue;
        out.overlap_pairs[h[d]] += v;
        row_l += std::pow(s, 2.0 * w - h[d]);
      }
      out.pairs_examined += std::uint64_t{v} * v;
    }
    for (std::uint32_t j = 0; j < v; ++j) out.term_l[b * v + j] = row_l;
  }
  std::vector<std::uint64_t> by_union(2 * w + 1, 0);
  for (unsigned k = 1; k <= w; ++k) by_union[2 * w - k] = out.overlap_pairs[k];
  out.delta = weigh_powers(by_union, sigma);
  return out;
}

// ---------------------------------------------------------------- Janson

JansonBounds janson_bounds(std::span<const Rational> zero_probs, const Rational& delta) {
  if (delta < 0) throw InputError("Delta must be non-negative");
  JansonBounds out;
  out.ell_range = static_cast<unsigned>(zero_probs.size());
  out.delta = to_double(delta);
  if (zero_probs.empty()) {
    out.product_lower = 1;
    out.lower = out.upper = 1.0;
    return out;
  }
  Rational product = 1;
  Rational smallest = zero_probs[0];
  for (const auto& p : zero_probs) {
    product *= p;
    smallest = std::min(smallest, p);
  }
  for (std::size_t i = 0; i < zero_probs.size(); ++i) {
    if (zero_probs[i] != zero_probs[0] || zero_probs[i] < Rational(1, 2)) {
      const double classical = to_double(product) * std::exp(out.delta / to_double(smallest));
      throw JansonHypothesisError("tightened Janson bound needs every P[C_i=0] equal and >= 1/2; P[C_" +
                                      std::to_string(i) + "=0] = " + resil::to_string(zero_probs[i]) + " (first is " +
                                      resil::to_string(zero_probs[0]) + ")",
                                  classical);
    }
  }
  out.product_lower = product;
  out.lower = to_double(product);

  const Rational two_delta = 2 * delta;
  Rational term = 1, sum = 0;
  unsigned ell = 0;
  while (ell < out.ell_range) {
    ++ell;
    term *= two_delta;
    term /= ell;
    sum += term;
    if (term == 0 || to_double(term) < kJansonRelativeTruncation * to_double(sum)) break;
  }
  out.ell_used = ell;
  if (ell < out.ell_range) {
    // sum_{l > L} x^l / l! <= x^(L+1) / (L+1)! * e^x
    out.tail_bound = to_double(term * two_delta / (ell + 1)) * std::exp(to_double(two_delta));
  }
  out.upper = to_double(product * (1 + sum)) + out.lower * out.tail_bound;
  return out;
}

// ---------------------------------------------------------------- Bonferroni

namespace {

double binomial_double(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

template <class Fn>
void for_each_subset(std::size_t m, unsigned k, Fn&& fn) {
  if (k > m) return;
  std::vector<std::size_t> idx(k);
  for (unsigned t = 0; t < k; ++t) idx[t] = t;
  for (;;) {
    fn(std::span<const std::size_t>(idx));
    int t = static_cast<int>(k) - 1;
    while (t >= 0 && idx[t] == m - k + static_cast<std::size_t>(t)) --t;
    if (t < 0) return;
    ++idx[t];
    for (unsigned r = static_cast<unsigned>(t) + 1; r < k; ++r) idx[r] = idx[r - 1] + 1;
  }
}

}  // namespace

BonferroniResult bonferroni_bounds(std::size_t m, unsigned k, const JointProbability& prob_all,
                                   std::uint64_t subset_cap) {
  if (k % 2 == 0) throw InputError("Bonferroni truncation needs an odd K");
  double subsets = 0.0;
  for (unsigned j = 1; j <= k; ++j) subsets += binomial_double(m, j);
  if (subsets > static_cast<double>(subset_cap)) throw ResourceError("Bonferroni subsets exceed the budget");
  BonferroniResult out;
  out.k = k;
  out.s.assign(k + 1, Rational(0));
  for (unsigned j = 1; j <= k; ++j) {
    for_each_subset(m, j, [&](std::span<const std::size_t> subset) { out.s[j] += prob_all(subset); });
  }
  out.truncated = 0;
  for (unsigned j = 1; j < k; ++j) out.truncated += (j % 2 == 1) ? out.s[j] : -out.s[j];
  out.error_term = out.s[k];
  return out;
}

// ---------------------------------------------------------------- sandwich

namespace {

BigInt binomial(std::uint64_t n, std::uint64_t k) {
  BigInt r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

}  // namespace

Rational zero_probability(const ResilientCircuit& c, std::span<const std::uint64_t> rows, const Rational& sigma,
                          unsigned threads) {
  const std::uint64_t n = c.num_inputs();
  const std::uint32_t v = c.params().v;
  const std::vector<std::uint64_t> base(n, 0);
  std::vector<std::uint64_t> free(n);
  for (std::uint64_t k = 0; k < n; ++k) free[k] = k;
  const auto hist = circuit::popcount_histogram(base, free, [&](std::span<const std::uint64_t> x) {
    std::uint64_t any = 0;
    for (auto i : rows) {
      for (std::uint32_t j = 0; j < v; ++j) {
        std::uint64_t t = ~0ULL;
        for (auto cell : c.term(i, j)) t &= x[cell];
        any |= t;
      }
    }
    return any;
  }, threads);
  return 1 - circuit::weigh_histogram(hist, sigma);
}

SandwichReport sandwich_bias(const generator::Generator& g, const Rational& sigma, unsigned k,
                             const SandwichOptions& options) {
  if (k % 2 == 0) throw InputError("the sandwich needs an odd K");
  const auto& p = g.params();
  if (!(sigma > 0 && sigma <= Rational(1, 2))) throw InputError("sigma must lie in (0, 1/2]");
  double subsets = 0.0;
  for (unsigned j = 1; j <= k; ++j) subsets += binomial_double(static_cast<std::uint64_t>(p.u), j);
  if (subsets > static_cast<double>(options.subset_cap)) throw ResourceError("sandwich subsets exceed the budget");

  const ResilientCircuit c(g);
  const auto u = static_cast<std::uint64_t>(p.u);
  SandwichReport out;
  out.k = k;
  const Rational term_zero = 1 - pow(sigma, p.w);
  out.p = pow(term_zero, p.v);
  out.bias = pow(1 - out.p, static_cast<unsigned long>(u));
  const bool enumerable = p.n() <= options.exact_bits;

  std::vector<double> low(k + 1, 0.0), high(k + 1, 0.0);
  for (unsigned level = 1; level <= k; ++level) {
    SandwichLevel row;
    row.k = level;
    row.reference = Rational(binomial(u, level)) * pow(out.p, level);
    row.janson_lower = row.reference;
    Rational exact_sum = 0;
    double janson_sum = 0.0;
    for_each_subset(u, level, [&](std::span<const std::size_t> subset) {
      ++row.subsets;
      const std::vector<std::uint64_t> rows(subset.begin(), subset.end());
      const auto delta = compute_delta(c, rows, sigma);
      const std::vector<Rational> zero(rows.size() * p.v, term_zero);
      janson_sum += janson_bounds(zero, delta.delta).upper;
      if (enumerable) exact_sum += zero_probability(c, subset, sigma, options.threads);
    });
    row.janson_upper = janson_sum;
    const double ref = to_double(row.reference);
    if (enumerable) {
      row.exact = exact_sum;
      low[level] = high[level] = to_double(exact_sum);
    } else {
      low[level] = ref;
      high[level] = janson_sum;
    }
    row.deviation = ref > 0 ? high[level] / ref : 1.0;
    out.levels.push_back(std::move(row));
  }

  // Bonferroni: P[some row is 0] lies in [sum_{j<K} (-1)^(j-1) S_j, ... + S_K].
  double pz_low = 0.0, pz_high = 0.0;
  for (unsigned j = 1; j < k; ++j) {
    if (j % 2 == 1) {
      pz_low += low[j];
      pz_high += high[j];
    } else {
      pz_low -= high[j];
      pz_high -= low[j];
    }
  }
  pz_high += high[k];
  out.ec_lower = std::clamp(1.0 - pz_high, 0.0, 1.0);
  out.ec_upper = std::clamp(1.0 - pz_low, 0.0, 1.0);
  const double bias = to_double(out.bias);
  out.deviation_bound = std::max(std::abs(out.ec_upper - bias), std::abs(out.ec_lower - bias));
  if (enumerable) out.exact_ec = circuit::exact_bias(c, sigma, options.exact_bits, options.threads);
  return out;
}

}  // namespace resil::analysis
