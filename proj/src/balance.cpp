#include "resil/balance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "resil/analysis.hpp"

namespace resil::balance {

using circuit::BooleanFunction;
using circuit::Coalition;
using circuit::FunctionPtr;
using circuit::ResilientCircuit;
using circuit::TernaryWords;

namespace {

const Rational kHalf(1, 2);

BigInt power_of_two(std::uint64_t n) {
  BigInt out;
  mpz_ui_pow_ui(out.get_mpz_t(), 2, n);
  return out;
}

const ResilientCircuit* as_read_once(const BooleanFunction& f) {
  const auto* c = dynamic_cast<const ResilientCircuit*>(&f);
  return c != nullptr && c->num_rows() == 1 ? c : nullptr;
}

std::uint64_t can_one(const TernaryWords& t) { return t.unknown | t.value; }
std::uint64_t can_zero(const TernaryWords& t) { return t.unknown | ~t.value; }

}  // namespace

// ---------------------------------------------------------------- DNF

DyadicDNF::DyadicDNF(std::uint64_t n, BigInt k) : n_(n), k_(std::move(k)) {
  if (n < 1) throw InputError("dyadic DNF needs n >= 1");
  const BigInt full = power_of_two(n);
  if (k_ < 0 || k_ > full) throw InputError("numerator k must lie in [0, 2^" + std::to_string(n) + "]");
  alpha_.assign(n, 0);
  if (k_ == full) {
    constant_true_ = true;
    return;
  }
  for (std::uint64_t i = 1; i <= n; ++i) {
    if (mpz_tstbit(k_.get_mpz_t(), n - i)) {
      alpha_[i - 1] = 1;
      terms_.push_back(i);
    }
  }
}

BigInt DyadicDNF::satisfying_count() const {
  if (constant_true_) return power_of_two(n_);
  BigInt total = 0;
  for (auto i : terms_) total += power_of_two(n_ - i);
  return total;
}

std::vector<Rational> DyadicDNF::bit_influences(const Rational& sigma) const {
  std::vector<Rational> out(n_, Rational(0));
  if (constant_true_ || terms_.empty()) return out;
  // tail = P[the DNF restricted to positions > p outputs 1], built backwards.
  Rational tail = 0;
  const std::uint64_t last = terms_.back();
  std::vector<Rational> tails(last);
  for (std::uint64_t p = last; p-- > 0;) {
    tails[p] = tail;
    tail = sigma * alpha_[p] + (1 - sigma) * tail;
  }
  Rational prefix = 1;
  for (std::uint64_t p = 0; p < last; ++p) {
    out[p] = prefix * (alpha_[p] ? 1 - tails[p] : tails[p]);
    out[p].canonicalize();
    prefix *= 1 - sigma;
  }
  return out;
}

Rational DyadicDNF::bit_influence(std::uint64_t position, const Rational& sigma) const {
  if (position >= n_) throw InputError("position out of range");
  return bit_influences(sigma)[position];
}

std::string DyadicDNF::name() const { return "dyadic-dnf:" + std::to_string(n_) + ":" + k_.get_str(); }

std::uint64_t DyadicDNF::eval_words(std::span<const std::uint64_t> x) const {
  if (constant_true_) return ~0ULL;
  std::uint64_t out = 0, prefix = ~0ULL;
  const std::uint64_t last = terms_.empty() ? 0 : terms_.back();
  for (std::uint64_t p = 0; p < last && prefix; ++p) {
    if (alpha_[p]) out |= prefix & x[p];
    prefix &= ~x[p];
  }
  return out;
}

TernaryWords DyadicDNF::eval_ternary_words(std::span<const std::uint64_t> x, const Coalition& q) const {
  if (constant_true_) return {0, ~0ULL};
  // D is decided by the first input that is 1; track which outcomes remain possible.
  std::uint64_t maybe_one = 0, maybe_zero = 0, prefix = ~0ULL;
  const auto& pos = q.positions();
  std::size_t next = 0;
  const std::uint64_t last = terms_.empty() ? 0 : terms_.back();
  for (std::uint64_t p = 0; p < last && prefix; ++p) {
    while (next < pos.size() && pos[next] < p) ++next;
    const std::uint64_t unknown = next < pos.size() && pos[next] == p ? ~0ULL : 0;
    const TernaryWords bit{unknown, x[p]};
    (alpha_[p] ? maybe_one : maybe_zero) |= prefix & can_one(bit);
    prefix &= can_zero(bit);
  }
  maybe_zero |= prefix;
  return {maybe_one & maybe_zero, maybe_one & ~maybe_zero};
}

std::optional<Rational> DyadicDNF::closed_form_bias(const Rational& sigma) const {
  if (constant_true_) return Rational(1);
  Rational total = 0;
  for (auto i : terms_) total += pow(1 - sigma, i - 1) * sigma;
  return total;
}

std::shared_ptr<const DyadicDNF> build_dyadic_dnf(std::uint64_t n, const BigInt& k) {
  return std::make_shared<const DyadicDNF>(n, k);
}

// ---------------------------------------------------------------- C'

Composite::Composite(FunctionPtr c1, FunctionPtr c2, std::shared_ptr<const DyadicDNF> d)
    : c1_(std::move(c1)), c2_(std::move(c2)), d_(std::move(d)) {
  if (!c1_ || !c2_ || !d_) throw InputError("composite needs C1, C2 and D");
  if (d_->num_inputs() != c1_->num_inputs()) throw InputError("D must read the same inputs as C1");
}

std::string Composite::name() const { return "balanced(" + c1_->name() + ", " + c2_->name() + ")"; }

std::uint64_t Composite::eval_words(std::span<const std::uint64_t> inputs) const {
  const auto x = inputs.first(x_bits());
  const auto y = inputs.subspan(x_bits(), y_bits());
  const std::uint64_t b = c2_->eval_words(y);
  return (c1_->eval_words(x) & b) | (d_->eval_words(x) & ~b);
}

TernaryWords Composite::eval_ternary_words(std::span<const std::uint64_t> inputs, const Coalition& q) const {
  const auto x = inputs.first(x_bits());
  const auto y = inputs.subspan(x_bits(), y_bits());
  const Coalition qx = q.restrict(0, x_bits());
  const TernaryWords a = c1_->eval_ternary_words(x, qx);
  const TernaryWords d = d_->eval_ternary_words(x, qx);
  const TernaryWords b = c2_->eval_ternary_words(y, q.restrict(x_bits(), y_bits()));
  const std::uint64_t one = (can_one(b) & can_one(a)) | (can_zero(b) & can_one(d));
  const std::uint64_t zero = (can_one(b) & can_zero(a)) | (can_zero(b) & can_zero(d));
  return {one & zero, one & ~zero};
}

std::optional<Rational> Composite::closed_form_bias(const Rational& sigma) const {
  const auto e1 = c1_->closed_form_bias(sigma);
  const auto e2 = c2_->closed_form_bias(sigma);
  const auto ed = d_->closed_form_bias(sigma);
  if (!e1 || !e2 || !ed) return std::nullopt;
  return *e1 * *e2 + *ed * (1 - *e2);
}

// ---------------------------------------------------------------- composition

std::string to_string(Mode mode) { return mode == Mode::kPaper ? "paper" : "exact-dyadic"; }

Mode parse_mode(const std::string& text) {
  if (text == "paper") return Mode::kPaper;
  if (text == "exact-dyadic") return Mode::kExactDyadic;
  throw InputError("unknown balance mode '" + text + "' (expected paper or exact-dyadic)");
}

BalancedComposite compose_balanced(FunctionPtr c1, FunctionPtr c2, Mode mode, unsigned max_bits, unsigned threads) {
  if (!c1 || !c2) throw InputError("compose_balanced needs two functions");
  BalancedComposite b;
  b.mode = mode;
  b.e1 = circuit::exact_bias(*c1, kHalf, max_bits, threads);
  b.e2 = circuit::exact_bias(*c2, kHalf, max_bits, threads);
  b.delta = b.e1 - kHalf;
  b.mu = 1 - b.e2;
  if (!(b.mu > 2 * abs(b.delta))) {
    throw HypothesisError("balancing needs P[C2 = 0] > 2 |E[C1] - 1/2|, got mu = " + resil::to_string(b.mu) +
                          " and delta = " + resil::to_string(b.delta));
  }
  b.target = kHalf + b.delta - b.delta / b.mu;
  if (b.target < 0 || b.target > 1) throw std::logic_error("DNF target " + resil::to_string(b.target) + " left [0, 1]");

  const std::uint64_t n = c1->num_inputs();
  const BigInt full = power_of_two(n);
  const Rational scaled = b.target * Rational(full);
  BigInt k;
  if (mode == Mode::kExactDyadic) {
    if (scaled.get_den() != 1) {
      std::string den = b.target.get_den().get_str();
      if (den.size() > 40) den = den.substr(0, 20) + "... (" + std::to_string(den.size()) + " digits)";
      throw ParameterError("exact-dyadic balance refused: E[D] has denominator " + den + ", which does not divide 2^" +
                           std::to_string(n));
    }
    k = scaled.get_num();
  } else {
    const Rational shifted = scaled + kHalf;
    k = shifted.get_num() / shifted.get_den();
  }
  b.c1 = std::move(c1);
  b.c2 = std::move(c2);
  b.d = build_dyadic_dnf(n, k);
  b.circuit = std::make_shared<const Composite>(b.c1, b.c2, b.d);
  b.dnf_mean = Rational(k, full);
  b.dnf_mean.canonicalize();
  b.mean = b.e1 * b.e2 + b.dnf_mean * b.mu;
  b.residual = abs(b.mean - kHalf);
  return b;
}

Rational disagreement(const BooleanFunction& c1, const DyadicDNF& d, unsigned max_bits) {
  if (d.num_inputs() != c1.num_inputs()) throw InputError("C1 and D must have the same inputs");
  if (const auto* tribes = as_read_once(c1)) {
    const Rational e1 = *tribes->closed_form_bias(kHalf);
    const Rational ed = *d.closed_form_bias(kHalf);
    if (d.constant_true()) return 1 - e1;
    const auto& p = tribes->params();
    // Conditioned on x_1..x_{i-1} = 0, x_i = 1, a term survives iff it
    // avoids the zeros; the one holding position i - 1 needs w - 1 more ones.
    std::vector<std::uint64_t> min_of(p.v), owner(c1.num_inputs());
    for (std::uint32_t j = 0; j < p.v; ++j) {
      const auto t = tribes->term(0, j);
      min_of[j] = *std::min_element(t.begin(), t.end());
      for (auto c : t) owner[c] = j;
    }
    std::vector<std::uint64_t> sorted_min = min_of;
    std::sort(sorted_min.begin(), sorted_min.end());
    const Rational miss_full = 1 - pow(kHalf, p.w);
    const Rational miss_owner = 1 - pow(kHalf, p.w - 1);
    std::vector<Rational> miss_pow{Rational(1)};
    for (std::uint32_t a = 0; a < p.v; ++a) miss_pow.push_back(miss_pow.back() * miss_full);
    Rational joint = 0;
    for (auto i : d.terms()) {
      const std::uint64_t pos = i - 1;
      const auto alive = static_cast<std::uint64_t>(sorted_min.end() -
                                                    std::lower_bound(sorted_min.begin(), sorted_min.end(), pos));
      const bool own = min_of[owner[pos]] == pos;
      const Rational none = miss_pow[alive - (own ? 1 : 0)] * (own ? miss_owner : Rational(1));
      joint += pow(kHalf, i) * (1 - none);
    }
    return e1 + ed - 2 * joint;
  }
  const std::uint64_t n = c1.num_inputs();
  if (n > max_bits) throw ResourceError("disagreement needs enumeration of " + std::to_string(n) + " inputs");
  std::vector<std::uint64_t> base(n, 0), free(n);
  for (std::uint64_t k = 0; k < n; ++k) free[k] = k;
  const auto hist = circuit::popcount_histogram(
      base, free, [&](std::span<const std::uint64_t> x) { return c1.eval_words(x) ^ d.eval_words(x); });
  return circuit::weigh_histogram(hist, kHalf);
}

Rational bit_influence(const BooleanFunction& f, std::uint64_t position, unsigned max_bits) {
  if (position >= f.num_inputs()) throw InputError("position out of range");
  if (const auto* d = dynamic_cast<const DyadicDNF*>(&f)) return d->bit_influence(position, kHalf);
  if (const auto* tribes = as_read_once(f)) {
    const auto& p = tribes->params();
    return pow(1 - pow(kHalf, p.w), p.v - 1) * pow(kHalf, p.w - 1);
  }
  return *analysis::influence_exact(f, Coalition(f.num_inputs(), {position}), kHalf, max_bits).exact;
}

SingletonReport singleton_influences(const BalancedComposite& b, unsigned max_bits) {
  if (!b.circuit) throw InputError("composite is empty");
  SingletonReport r;
  bool first = true;
  auto consider = [&](const Rational& value, const Rational& bound, std::uint64_t position) {
    if (first || value > r.worst) {
      r.worst = value;
      r.worst_position = position;
    }
    if (first || bound > r.worst_lemma_bound) r.worst_lemma_bound = bound;
    first = false;
  };
  const std::uint64_t nx = b.c1->num_inputs();
  const auto d_inf = b.d->bit_influences(kHalf);
  const bool c1_uniform = as_read_once(*b.c1) != nullptr;
  Rational c1_inf = c1_uniform ? bit_influence(*b.c1, 0, max_bits) : Rational(0);
  for (std::uint64_t p = 0; p < nx; ++p) {
    if (!c1_uniform) c1_inf = bit_influence(*b.c1, p, max_bits);
    consider(b.e2 * c1_inf + b.mu * d_inf[p], c1_inf + b.mu, p);
  }
  const Rational split = disagreement(*b.c1, *b.d, max_bits);
  const std::uint64_t ny = b.c2->num_inputs();
  const bool c2_uniform = as_read_once(*b.c2) != nullptr;
  Rational c2_inf = c2_uniform ? bit_influence(*b.c2, 0, max_bits) : Rational(0);
  for (std::uint64_t p = 0; p < ny; ++p) {
    if (!c2_uniform) c2_inf = bit_influence(*b.c2, p, max_bits);
    consider(c2_inf * split, c2_inf + b.mu, nx + p);
  }
  return r;
}

// ---------------------------------------------------------------- KKL matcher

std::string to_string(SecondKind kind) { return kind == SecondKind::kTribes ? "tribes" : "or"; }

SecondKind parse_second_kind(const std::string& text) {
  if (text == "tribes") return SecondKind::kTribes;
  if (text == "or") return SecondKind::kOr;
  throw InputError("unknown second circuit '" + text + "' (expected tribes or or)");
}

std::uint64_t min_n_target(SecondKind kind) { return kind == SecondKind::kTribes ? 64 : 5; }

namespace {

// Picks w >= 1 minimizing |v(w) w - n| for a nondecreasing size v(w) w.
template <class SizeOf>
std::uint32_t closest_width(std::uint64_t n, SizeOf size_of) {
  std::uint32_t best = 1;
  double best_gap = std::abs(size_of(1) - static_cast<double>(n));
  for (std::uint32_t w = 2; w <= 40; ++w) {
    const double size = size_of(w);
    const double gap = std::abs(size - static_cast<double>(n));
    if (gap < best_gap) {
      best = w;
      best_gap = gap;
    }
    if (size > 2.0 * static_cast<double>(n)) break;
  }
  return best;
}

// Fills the parameter part of the record; nullopt when the equations fail.
std::optional<KklRecord> plan_kkl(std::uint64_t n_target, const KklOptions& opts) {
  if (n_target < min_n_target(opts.second)) return std::nullopt;
  KklRecord r;
  r.n_target = n_target;
  r.second = opts.second;
  auto v_of = [](std::uint32_t w) { return std::ceil(std::ldexp(std::log(2.0), static_cast<int>(w))); };
  r.w = closest_width(n_target, [&](std::uint32_t w) { return v_of(w) * w; });
  r.v = static_cast<std::uint32_t>(v_of(r.w));
  r.n = std::uint64_t{r.v} * r.w;
  const Rational delta = 1 - pow(1 - pow(kHalf, r.w), r.v) - kHalf;
  const double ln_n = std::log(static_cast<double>(r.n));
  r.c1 = std::abs(to_double(delta)) * static_cast<double>(r.n) / ln_n;
  if (opts.second == SecondKind::kTribes) {
    r.log_argument = std::log(static_cast<double>(r.n) / (3.0 * r.c1 * ln_n));
    if (!(r.log_argument > 0)) return std::nullopt;
    auto v2_of = [&](std::uint32_t w) { return std::ceil(std::ldexp(r.log_argument, static_cast<int>(w))); };
    r.w2 = closest_width(r.n, [&](std::uint32_t w) { return v2_of(w) * w; });
    r.v2 = static_cast<std::uint32_t>(v2_of(r.w2));
  } else {
    // Largest t with 2^-t > 2 |delta|.
    std::uint32_t t = 0;
    while (pow(kHalf, t + 1) > 2 * abs(delta)) ++t;
    if (t == 0) return std::nullopt;
    r.w2 = 1;
    r.v2 = t;
  }
  const Rational mu = pow(1 - pow(kHalf, r.w2), r.v2);
  if (!(mu > 2 * abs(delta))) return std::nullopt;
  r.total_bits = r.n + std::uint64_t{r.v2} * r.w2;
  r.influence_c1 = pow(1 - pow(kHalf, r.w), r.v - 1) * pow(kHalf, r.w - 1);
  r.influence_c2 = pow(1 - pow(kHalf, r.w2), r.v2 - 1) * pow(kHalf, r.w2 - 1);
  return r;
}

}  // namespace

KklMatcher build_kkl_matcher(std::uint64_t n_target, const KklOptions& opts) {
  auto planned = plan_kkl(n_target, opts);
  if (!planned) {
    const std::uint64_t floor = min_n_target(opts.second);
    const std::uint64_t reach = std::max<std::uint64_t>(n_target, 1024);
    for (std::uint64_t gap = 1; gap <= reach; ++gap) {
      for (const std::uint64_t candidate : {n_target >= gap ? n_target - gap : 0, n_target + gap}) {
        if (candidate >= floor && plan_kkl(candidate, opts)) {
          throw ParameterError("no feasible tribes parameters for n_target = " + std::to_string(n_target) +
                               "; nearest feasible n_target is " + std::to_string(candidate));
        }
      }
    }
    throw ParameterError("no feasible tribes parameters near n_target = " + std::to_string(n_target));
  }
  KklMatcher m;
  m.record = *planned;
  auto& r = m.record;
  FunctionPtr c2 = r.second == SecondKind::kTribes ? FunctionPtr(circuit::make_tribes(r.v2, r.w2))
                                                   : FunctionPtr(circuit::make_or(r.v2));
  m.composite = compose_balanced(circuit::make_tribes(r.v, r.w), std::move(c2), opts.mode);
  r.singleton = singleton_influences(m.composite);
  const double big_n = static_cast<double>(r.total_bits);
  r.kkl_constant = to_double(r.singleton.worst) * big_n / std::log(big_n);
  return m;
}

}  // namespace resil::balance
