#include "resil/circuit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "resil/errors.hpp"
#include "resil/parallel.hpp"
#include "resil/rng.hpp"

namespace resil::circuit {

Ternary t_and(Ternary a, Ternary b) {
  if (a == Ternary::kZero || b == Ternary::kZero) return Ternary::kZero;
  if (a == Ternary::kOne && b == Ternary::kOne) return Ternary::kOne;
  return Ternary::kUnknown;
}

Ternary t_or(Ternary a, Ternary b) {
  if (a == Ternary::kOne || b == Ternary::kOne) return Ternary::kOne;
  if (a == Ternary::kZero && b == Ternary::kZero) return Ternary::kZero;
  return Ternary::kUnknown;
}

Ternary t_not(Ternary a) {
  if (a == Ternary::kUnknown) return a;
  return a == Ternary::kOne ? Ternary::kZero : Ternary::kOne;
}

std::string to_string(Ternary t) {
  switch (t) {
    case Ternary::kZero: return "0";
    case Ternary::kOne: return "1";
    case Ternary::kUnknown: return "?";
  }
  return "?";
}

// ---------------------------------------------------------------- coalition

Coalition::Coalition(std::uint64_t n, std::vector<std::uint64_t> positions) : n_(n), positions_(std::move(positions)) {
  std::sort(positions_.begin(), positions_.end());
  positions_.erase(std::unique(positions_.begin(), positions_.end()), positions_.end());
  if (!positions_.empty() && positions_.back() >= n_) {
    throw InputError("coalition position " + std::to_string(positions_.back()) + " outside [0, " +
                     std::to_string(n_) + ")");
  }
}

bool Coalition::contains(std::uint64_t position) const {
  return std::binary_search(positions_.begin(), positions_.end(), position);
}

Coalition Coalition::restrict(std::uint64_t offset, std::uint64_t length) const {
  std::vector<std::uint64_t> out;
  for (auto p : positions_) {
    if (p >= offset && p < offset + length) out.push_back(p - offset);
  }
  return Coalition(length, std::move(out));
}

std::vector<std::uint64_t> Coalition::complement() const {
  std::vector<std::uint64_t> out;
  out.reserve(n_ - positions_.size());
  std::size_t next = 0;
  for (std::uint64_t p = 0; p < n_; ++p) {
    if (next < positions_.size() && positions_[next] == p) {
      ++next;
    } else {
      out.push_back(p);
    }
  }
  return out;
}

Coalition Coalition::prefix(std::uint64_t n, std::uint64_t q) {
  if (q > n) throw InputError("coalition size exceeds n");
  std::vector<std::uint64_t> out(q);
  for (std::uint64_t p = 0; p < q; ++p) out[p] = p;
  return Coalition(n, std::move(out));
}

Coalition Coalition::random(std::uint64_t n, std::uint64_t q, std::uint64_t seed) {
  if (q > n) throw InputError("coalition size exceeds n");
  // Floyd's sampling of q distinct positions.
  RandomStream rng(seed, 0);
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = n - q; j < n; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return Coalition(n, std::vector<std::uint64_t>(chosen.begin(), chosen.end()));
}

Coalition Coalition::per_column(std::uint32_t v, std::uint32_t w, std::uint64_t q) {
  const std::uint64_t n = std::uint64_t{v} * w;
  if (q > n) throw InputError("coalition size exceeds n");
  std::vector<std::uint64_t> out(q);
  for (std::uint64_t t = 0; t < q; ++t) out[t] = generator::cell_index(v, t % w, static_cast<std::uint32_t>(t / w));
  return Coalition(n, std::move(out));
}

// ---------------------------------------------------------------- interface

TernaryWords BooleanFunction::eval_ternary_words(std::span<const std::uint64_t> inputs, const Coalition& q) const {
  std::vector<std::uint64_t> x(inputs.begin(), inputs.end());
  const auto& pos = q.positions();
  if (is_monotone()) {
    for (auto p : pos) x[p] = 0;
    const std::uint64_t lo = eval_words(x);
    for (auto p : pos) x[p] = ~0ULL;
    const std::uint64_t hi = eval_words(x);
    return {lo ^ hi, lo};
  }
  if (pos.size() > kMaxCompletionBits) {
    throw ResourceError("three-valued evaluation of a non-monotone function with " + std::to_string(pos.size()) +
                        " free bits exceeds the completion cap");
  }
  std::uint64_t any = 0, all = ~0ULL;
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << pos.size()); ++c) {
    for (std::size_t t = 0; t < pos.size(); ++t) x[pos[t]] = (c >> t) & 1 ? ~0ULL : 0ULL;
    const std::uint64_t out = eval_words(x);
    any |= out;
    all &= out;
  }
  return {any & ~all, any};
}

std::optional<Rational> BooleanFunction::closed_form_bias(const Rational&) const { return std::nullopt; }

bool BooleanFunction::eval(std::span<const std::uint8_t> bits) const {
  if (bits.size() != num_inputs()) throw InputError("assignment has the wrong length");
  std::vector<std::uint64_t> x(bits.size());
  for (std::size_t k = 0; k < bits.size(); ++k) x[k] = bits[k] ? ~0ULL : 0ULL;
  return eval_words(x) & 1;
}

Ternary BooleanFunction::eval(const Assignment& a) const {
  if (a.bits.size() != num_inputs()) throw InputError("assignment has the wrong length");
  if (a.unset.num_inputs() != num_inputs() && !a.unset.empty()) throw InputError("coalition has the wrong length");
  std::vector<std::uint64_t> x(a.bits.size());
  for (std::size_t k = 0; k < a.bits.size(); ++k) x[k] = a.bits[k] ? ~0ULL : 0ULL;
  const TernaryWords t = eval_ternary_words(x, a.unset);
  if (t.unknown & 1) return Ternary::kUnknown;
  return (t.value & 1) ? Ternary::kOne : Ternary::kZero;
}

// ---------------------------------------------------------------- C_G

ResilientCircuit::ResilientCircuit(const generator::Generator& g, Index term_cell_cap) : params_(g.params()) {
  const Index cells = params_.u * params_.v * params_.w;
  if (cells > term_cell_cap) throw ResourceError("circuit has " + index_to_string(cells) + " term cells; cap exceeded");
  rows_ = static_cast<std::uint64_t>(params_.u);
  cells_.resize(static_cast<std::size_t>(cells));
  std::vector<std::uint32_t> y(params_.w);
  std::size_t at = 0;
  for (std::uint64_t i = 0; i < rows_; ++i) {
    g.row_into(i, y);
    for (std::uint32_t j = 0; j < params_.v; ++j) {
      for (auto c : generator::block_set(params_, y, j).cells) cells_[at++] = c;
    }
  }
}

std::string ResilientCircuit::name() const {
  return "C_G(u=" + std::to_string(rows_) + ",v=" + std::to_string(params_.v) + ",w=" + std::to_string(params_.w) + ")";
}

std::uint64_t ResilientCircuit::eval_words(std::span<const std::uint64_t> x) const {
  const std::uint32_t v = params_.v;
  const std::uint32_t w = params_.w;
  const std::uint64_t* cell = cells_.data();
  std::uint64_t acc = ~0ULL;
  for (std::uint64_t i = 0; i < rows_ && acc; ++i) {
    std::uint64_t any = 0;
    const std::uint64_t* row = cell + i * v * w;
    for (std::uint32_t j = 0; j < v; ++j) {
      const std::uint64_t* t = row + std::size_t{j} * w;
      std::uint64_t term = ~0ULL;
      for (std::uint32_t k = 0; k < w && term; ++k) term &= x[t[k]];
      any |= term;
      if (any == ~0ULL) break;
    }
    acc &= any;
  }
  return acc;
}

std::optional<Rational> ResilientCircuit::closed_form_bias(const Rational& sigma) const {
  if (rows_ != 1) return std::nullopt;
  return 1 - pow(1 - pow(sigma, params_.w), params_.v);
}

std::shared_ptr<const ResilientCircuit> build_circuit(const generator::Generator& g) {
  return std::make_shared<const ResilientCircuit>(g);
}

std::shared_ptr<const ResilientCircuit> make_tribes(std::uint32_t v, std::uint32_t w) {
  if (v < 1 || w < 1) throw InputError("tribes needs v, w >= 1");
  const generator::Params p{1, v, w, Rational(1, 2)};
  return build_circuit(generator::Generator::from_table(p, std::vector<std::uint32_t>(w, 0)));
}

std::shared_ptr<const ResilientCircuit> make_or(std::uint32_t t) { return make_tribes(t, 1); }

// ---------------------------------------------------------------- baselines

Majority::Majority(std::uint64_t n) : n_(n) {
  if (n % 2 == 0) throw InputError("majority needs an odd number of inputs");
}

std::uint64_t Majority::eval_words(std::span<const std::uint64_t> x) const {
  // Vertical counter: plane p holds bit p of each lane's running count.
  const unsigned planes = static_cast<unsigned>(std::bit_width(n_));
  std::vector<std::uint64_t> count(planes, 0);
  for (std::uint64_t k = 0; k < n_; ++k) {
    std::uint64_t carry = x[k];
    for (unsigned p = 0; p < planes && carry; ++p) {
      const std::uint64_t next = count[p] & carry;
      count[p] ^= carry;
      carry = next;
    }
  }
  // count >= (n+1)/2 iff subtracting the threshold leaves no borrow.
  const std::uint64_t threshold = (n_ + 1) / 2;
  std::uint64_t borrow = 0;
  for (unsigned p = 0; p < planes; ++p) {
    borrow = ((threshold >> p) & 1) ? (~count[p] | borrow) : (~count[p] & borrow);
  }
  return ~borrow;
}

std::optional<Rational> Majority::closed_form_bias(const Rational& sigma) const {
  Rational total = 0;
  BigInt binom = 1;
  for (std::uint64_t k = 0; k <= n_; ++k) {
    if (k > 0) {
      binom *= static_cast<unsigned long>(n_ - k + 1);
      binom /= static_cast<unsigned long>(k);
    }
    if (k >= (n_ + 1) / 2) total += Rational(binom) * pow(sigma, k) * pow(1 - sigma, n_ - k);
  }
  return total;
}

RecursiveMajority3::RecursiveMajority3(unsigned depth) : depth_(depth), n_(1) {
  if (depth < 1 || depth > 30) throw InputError("recmaj3 depth must lie in [1, 30]");
  for (unsigned d = 0; d < depth; ++d) n_ *= 3;
}

std::uint64_t RecursiveMajority3::eval_words(std::span<const std::uint64_t> x) const {
  std::vector<std::uint64_t> level(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n_));
  while (level.size() > 1) {
    std::vector<std::uint64_t> up(level.size() / 3);
    for (std::size_t t = 0; t < up.size(); ++t) {
      const std::uint64_t a = level[3 * t], b = level[3 * t + 1], c = level[3 * t + 2];
      up[t] = (a & b) | (a & c) | (b & c);
    }
    level.swap(up);
  }
  return level[0];
}

std::optional<Rational> RecursiveMajority3::closed_form_bias(const Rational& sigma) const {
  Rational p = sigma;
  for (unsigned d = 0; d < depth_; ++d) p = 3 * p * p - 2 * p * p * p;
  return p;
}

FunctionPtr make_baseline(const std::string& spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  auto number = [&](std::size_t k) {
    const Index x = parse_index(parts[k]);
    if (x == 0 || x > 0xffffffffULL) throw InputError("baseline parameter out of range in '" + spec + "'");
    return static_cast<std::uint32_t>(x);
  };
  if (parts[0] == "majority" && parts.size() == 2) return std::make_shared<const Majority>(number(1));
  if (parts[0] == "tribes" && parts.size() == 3) return make_tribes(number(1), number(2));
  if (parts[0] == "recmaj3" && parts.size() == 2) return std::make_shared<const RecursiveMajority3>(number(1));
  if (parts[0] == "or" && parts.size() == 2) return make_or(number(1));
  throw InputError("unknown baseline '" + spec + "' (expected majority:n, tribes:v:w, recmaj3:d or or:t)");
}

// ---------------------------------------------------------------- enumeration

namespace {

constexpr std::uint64_t kLanePattern[6] = {0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
                                           0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};

}  // namespace

std::vector<std::uint64_t> popcount_histogram(
    std::span<const std::uint64_t> base, std::span<const std::uint64_t> free_positions,
    const std::function<std::uint64_t(std::span<const std::uint64_t>)>& lanes_of, unsigned threads) {
  const auto m = static_cast<unsigned>(free_positions.size());
  if (m > 40) throw ResourceError("enumeration over more than 40 free bits");
  const unsigned low = std::min(m, 6U);
  const unsigned high = m - low;
  const std::uint64_t valid = low == 6 ? ~0ULL : (std::uint64_t{1} << (std::uint64_t{1} << low)) - 1;
  std::uint64_t lane_class[7] = {};
  for (std::uint64_t l = 0; l < (std::uint64_t{1} << low); ++l) lane_class[std::popcount(l)] |= std::uint64_t{1} << l;

  const std::uint64_t words = std::uint64_t{1} << high;
  const unsigned chunk_bits = std::min(high, 12U);
  const std::uint64_t chunk = std::uint64_t{1} << chunk_bits;
  const std::uint64_t tasks = words / chunk;
  std::vector<std::vector<std::uint64_t>> partial(tasks);
  parallel_for(tasks, threads, [&](std::size_t task) {
    std::vector<std::uint64_t> x(base.begin(), base.end());
    for (unsigned l = 0; l < low; ++l) x[free_positions[l]] = kLanePattern[l];
    std::vector<std::uint64_t> hist(m + 1, 0);
    for (std::uint64_t wd = task * chunk; wd < (task + 1) * chunk; ++wd) {
      for (unsigned h = 0; h < high; ++h) x[free_positions[low + h]] = (wd >> h) & 1 ? ~0ULL : 0ULL;
      const std::uint64_t out = lanes_of(x) & valid;
      if (!out) continue;
      const unsigned ones = static_cast<unsigned>(std::popcount(wd));
      for (unsigned c = 0; c <= low; ++c) hist[ones + c] += static_cast<std::uint64_t>(std::popcount(out & lane_class[c]));
    }
    partial[task] = std::move(hist);
  });
  std::vector<std::uint64_t> hist(m + 1, 0);
  for (const auto& part : partial) {
    for (unsigned k = 0; k <= m; ++k) hist[k] += part[k];
  }
  return hist;
}

Rational weigh_histogram(std::span<const std::uint64_t> hist, const Rational& sigma) {
  const std::size_t m = hist.size() - 1;
  Rational total = 0;
  for (std::size_t k = 0; k <= m; ++k) {
    if (hist[k] == 0) continue;
    total += Rational(BigInt(std::to_string(hist[k]))) * pow(sigma, k) * pow(1 - sigma, m - k);
  }
  return total;
}

Rational exact_bias(const BooleanFunction& f, const Rational& sigma, unsigned max_bits, unsigned threads) {
  if (!(sigma >= 0 && sigma <= 1)) throw InputError("sigma must lie in [0, 1]");
  if (auto closed = f.closed_form_bias(sigma)) return *closed;
  const std::uint64_t n = f.num_inputs();
  if (n > max_bits) {
    throw ResourceError("exact bias by enumeration needs n <= " + std::to_string(max_bits) + ", got " + std::to_string(n));
  }
  std::vector<std::uint64_t> base(n, 0), free(n);
  for (std::uint64_t k = 0; k < n; ++k) free[k] = k;
  const auto hist = popcount_histogram(base, free, [&](std::span<const std::uint64_t> x) { return f.eval_words(x); },
                                       threads);
  return weigh_histogram(hist, sigma);
}

Estimate monte_carlo(std::uint64_t n, const Rational& sigma, std::uint64_t samples, std::uint64_t seed,
                     unsigned threads,
                     const std::function<std::uint64_t(std::span<std::uint64_t>, std::uint64_t)>& count_lanes) {
  if (samples < 1) throw InputError("at least one sample is required");
  const std::uint64_t words = (samples + 63) / 64;
  const std::uint64_t blocks = (words + kWordsPerBlock - 1) / kWordsPerBlock;
  std::vector<std::uint64_t> hits(blocks, 0);
  const BernoulliWords bern(sigma);
  parallel_for(blocks, threads, [&](std::size_t b) {
    RandomStream rng(seed, b);
    std::vector<std::uint64_t> x(n);
    const std::uint64_t end = std::min(words, (b + 1) * kWordsPerBlock);
    std::uint64_t local = 0;
    for (std::uint64_t wd = b * kWordsPerBlock; wd < end; ++wd) {
      for (auto& e : x) e = bern.draw(rng);
      const std::uint64_t remaining = samples - wd * 64;
      const std::uint64_t mask = remaining >= 64 ? ~0ULL : (std::uint64_t{1} << remaining) - 1;
      local += count_lanes(x, mask);
    }
    hits[b] = local;
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  Estimate e;
  e.samples = samples;
  e.point = static_cast<double>(total) / static_cast<double>(samples);
  e.std_error = std::sqrt(e.point * (1.0 - e.point) / static_cast<double>(samples));
  return e;
}

Estimate mc_bias(const BooleanFunction& f, const Rational& sigma, std::uint64_t samples, std::uint64_t seed,
                 unsigned threads) {
  return monte_carlo(f.num_inputs(), sigma, samples, seed, threads, [&](std::span<std::uint64_t> x, std::uint64_t mask) {
    return static_cast<std::uint64_t>(std::popcount(f.eval_words(x) & mask));
  });
}

}  // namespace resil::circuit
