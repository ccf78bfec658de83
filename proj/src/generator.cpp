#include "resil/generator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "resil/errors.hpp"
#include "resil/parallel.hpp"
#include "resil/rng.hpp"

namespace resil::generator {

void Params::validate() const {
  if (u < 1 || v < 1 || w < 1) throw InputError("u, v and w must be at least 1");
  if (!(sigma > 0 && sigma <= Rational(1, 2))) throw InputError("sigma must lie in (0, 1/2]");
}

BlockSet block_set(const Params& p, std::span<const std::uint32_t> y, std::uint32_t j) {
  if (y.size() != p.w) throw InputError("row has length " + std::to_string(y.size()) + ", expected w");
  if (j >= p.v) throw InputError("shift must lie in [0, v)");
  BlockSet out;
  out.cells.resize(p.w);
  for (unsigned k = 0; k < p.w; ++k) {
    if (y[k] >= p.v) throw InputError("row entry outside [0, v)");
    out.cells[k] = cell_index(p.v, k, static_cast<std::uint32_t>((std::uint64_t{y[k]} + j) % p.v));
  }
  return out;
}

namespace {

Index uniform_index(RandomStream& rng, Index bound) {
  if (bound <= Index{1} << 64 && bound > 0) {
    if (bound == Index{1} << 64) return rng.word();
    return rng.below(static_cast<std::uint64_t>(bound));
  }
  unsigned bits = 0;
  for (Index b = bound - 1; b > 0; b >>= 1) ++bits;
  const Index mask = bits >= 128 ? kIndexMax : (Index{1} << bits) - 1;
  for (;;) {
    const Index x = ((Index{rng.word()} << 64) | rng.word()) & mask;
    if (x < bound) return x;
  }
}

void check_prime_field(std::uint32_t v) {
  if (!galois::is_prime(v)) throw InputError("v = " + std::to_string(v) + " is not prime");
}

// v^c1 >= u, treating overflow of v^c1 as "certainly large enough".
bool message_space_covers(std::uint32_t v, unsigned c1, Index u) {
  Index space = 0;
  if (!checked_pow(v, c1, space)) return true;
  return space >= u;
}

}  // namespace

// ---------------------------------------------------------------- plans

unsigned rs_length_for(double ln_u, const Rational& sigma, unsigned c1) {
  long long t = 4;
  if (ln_u > 1.0) {
    const double ratio = std::log2(ln_u) / std::log2(1.0 / to_double(sigma));
    t = std::max<long long>(static_cast<long long>(std::floor(ratio)), 4);
  }
  return static_cast<unsigned>(static_cast<long long>(c1) * t / 3);
}

PlanDraft draft_explicit(std::uint32_t v, const Rational& sigma, unsigned c1, const PlanOptions& options) {
  check_prime_field(v);
  if (v < 5) throw InputError("the shift-inverse expander needs v >= 5");
  if (!(sigma > 0 && sigma <= Rational(1, 2))) throw InputError("sigma must lie in (0, 1/2]");
  if (c1 < 1) throw InputError("c1 must be at least 1");

  PlanDraft draft;
  draft.v = v;
  draft.sigma = sigma;
  draft.c1 = c1;
  const double ln_inv_sigma = std::log(1.0 / to_double(sigma));
  if (options.w) {
    draft.w = *options.w;
  } else {
    const double ln_v = std::log(static_cast<double>(v));
    draft.w = static_cast<unsigned>(std::max(1.0, std::round(std::log(v / ln_v) / ln_inv_sigma)));
  }
  if (draft.w < 1) throw InputError("w must be at least 1");
  const double s = to_double(sigma);
  draft.lambda_target = options.lambda_target.value_or(s * s / 4.0);

  const expander::ExpanderGraph base = expander::build_shift_inverse(v);
  const double lambda_base = expander::estimate_lambda(base, options.lambda);
  draft.lambda_base = lambda_base;
  if (lambda_base >= 1.0 - 1e-12) throw ParameterError("base expander has lambda = 1");
  unsigned k = 1;
  if (lambda_base > draft.lambda_target) {
    k = static_cast<unsigned>(std::ceil(std::log(draft.lambda_target) / std::log(lambda_base) - 1e-12));
    k = std::max(k, 1U);
  }
  const double ln3 = std::log(3.0);
  if (k * ln3 <= std::log(static_cast<double>(options.degree_cap))) {
    try {
      const auto powered = expander::power_to_target(base, draft.lambda_target, options.lambda, options.degree_cap);
      k = powered.power;
      draft.degree = powered.graph.degree();
      draft.lambda_estimated = powered.graph.lambda_estimated();
    } catch (const ResourceError&) {
      // the estimate forced a larger power than the cap allows
    }
  }
  draft.power = k;
  draft.ln_degree = k * ln3;
  if (!draft.degree) {
    draft.violations.push_back("degree 3^" + std::to_string(k) + " needed for lambda <= " +
                               std::to_string(draft.lambda_target) + " exceeds the degree cap");
    draft.resource_violation = true;
  }

  const double ln_v = std::log(static_cast<double>(v));
  double ln_u = ln_v + draft.w * draft.ln_degree;
  std::optional<unsigned> previous;
  for (unsigned it = 1; it <= options.max_iterations; ++it) {
    draft.iterations = it;
    draft.w2 = rs_length_for(ln_u, sigma, c1);
    draft.w1 = static_cast<int>(draft.w) - static_cast<int>(draft.w2);
    ln_u = ln_v + (std::max(draft.w1, 1) - 1) * draft.ln_degree;
    if (previous && *previous == draft.w2) {
      draft.converged = true;
      break;
    }
    previous = draft.w2;
  }
  draft.ln_u = ln_u;
  if (!draft.converged) draft.violations.push_back("u <-> w2 iteration did not reach a fixed point");

  if (draft.w2 >= draft.w) {
    draft.violations.push_back("w2 = " + std::to_string(draft.w2) + " >= w = " + std::to_string(draft.w) +
                               ": no columns left for the walk");
  }
  if (c1 >= draft.w2) {
    draft.violations.push_back("c1 = " + std::to_string(c1) + " >= w2 = " + std::to_string(draft.w2));
  }
  if (draft.w2 > v - 1) {
    draft.violations.push_back("w2 = " + std::to_string(draft.w2) + " exceeds the v - 1 nonzero evaluation points");
  }
  if (draft.degree && draft.w1 >= 1) {
    try {
      draft.u = expander::walk_index_space(v, *draft.degree, static_cast<unsigned>(draft.w1));
    } catch (const ResourceError&) {
      draft.violations.push_back("u = v*d^(w1-1) exceeds 128 bits");
      draft.resource_violation = true;
    }
  }
  if (draft.u) {
    if (!message_space_covers(v, c1, *draft.u)) draft.violations.push_back("v^c1 < u");
  } else if (c1 * ln_v < ln_u) {
    draft.violations.push_back("v^c1 < u");
  }
  return draft;
}

void ExplicitGeneratorPlan::validate() const {
  check_prime_field(v);
  if (!expander || !rs) throw ParameterError("plan is missing its expander or code");
  if (w1 < 1) throw ParameterError("w1 must be at least 1");
  if (w != w1 + w2) throw ParameterError("w must equal w1 + w2");
  if (!(w2 < w)) throw ParameterError("w2 must be smaller than w");
  if (!(c1 < w2)) throw ParameterError("c1 must be smaller than w2");
  if (rs->ell() != c1 || rs->length() != w2 || rs->layout() != galois::RsLayout::kNoConstant) {
    throw ParameterError("Reed-Solomon code does not match (c1, w2)");
  }
  if (expander->num_vertices() != v) throw ParameterError("expander has the wrong vertex count");
  if (u != expander::walk_index_space(v, expander->degree(), w1)) throw ParameterError("u != v*d^(w1-1)");
  if (!message_space_covers(v, c1, u)) throw ParameterError("v^c1 < u");
}

namespace {

ExplicitGeneratorPlan assemble_plan(std::uint32_t v, const Rational& sigma, unsigned w1, unsigned w2, unsigned c1,
                                    const expander::ExpanderGraph& graph, unsigned power, double lambda_base) {
  ExplicitGeneratorPlan plan;
  plan.v = v;
  plan.sigma = sigma;
  plan.w1 = w1;
  plan.w2 = w2;
  plan.w = w1 + w2;
  plan.c1 = c1;
  const double s = to_double(sigma);
  plan.lambda_target = s * s / 4.0;
  plan.lambda_base = lambda_base;
  plan.lambda_estimated = graph.lambda_estimated().value_or(1.0);
  plan.power = power;
  plan.expander = std::make_shared<const expander::ExpanderGraph>(graph);
  plan.rs = std::make_shared<const galois::RSCode>(galois::PrimeField(v), c1, w2, galois::RsLayout::kNoConstant);
  plan.u = expander::walk_index_space(v, graph.degree(), w1);
  plan.ln_u = std::log(to_double(Rational(to_bigint(plan.u))));
  return plan;
}

}  // namespace

ExplicitGeneratorPlan plan_explicit(std::uint32_t v, const Rational& sigma, unsigned c1, const PlanOptions& options) {
  const PlanDraft draft = draft_explicit(v, sigma, c1, options);
  if (!draft.violations.empty()) {
    std::string message = "explicit plan for v=" + std::to_string(v) + " is infeasible:";
    for (const auto& violation : draft.violations) message += " " + violation + ";";
    message.pop_back();
    throw ParameterError(message);
  }
  const expander::ExpanderGraph graph =
      expander::power(expander::build_shift_inverse(v), draft.power, options.degree_cap)
          .with_lambda_estimate(*draft.lambda_estimated);
  ExplicitGeneratorPlan plan = assemble_plan(v, sigma, static_cast<unsigned>(draft.w1), draft.w2, c1, graph,
                                             draft.power, *draft.lambda_base);
  plan.lambda_target = draft.lambda_target;
  plan.iterations = draft.iterations;
  plan.from_formula = true;
  plan.validate();
  return plan;
}

ExplicitGeneratorPlan make_plan(std::uint32_t v, const Rational& sigma, unsigned w1, unsigned w2, unsigned c1,
                                unsigned power, const expander::LambdaOptions& lambda) {
  check_prime_field(v);
  if (v < 5) throw InputError("the shift-inverse expander needs v >= 5");
  if (!(sigma > 0 && sigma <= Rational(1, 2))) throw InputError("sigma must lie in (0, 1/2]");
  if (w1 < 1 || w2 < 1 || c1 < 1 || power < 1) throw InputError("w1, w2, c1 and the power must be at least 1");
  if (c1 >= w2) throw ParameterError("c1 must be smaller than w2");
  if (w2 > v - 1) throw ParameterError("w2 exceeds the v - 1 nonzero evaluation points");
  const expander::ExpanderGraph base = expander::build_shift_inverse(v);
  const double lambda_base = expander::estimate_lambda(base, lambda);
  expander::ExpanderGraph graph = expander::power(base, power);
  graph = graph.with_lambda_estimate(expander::estimate_lambda(graph, lambda));
  ExplicitGeneratorPlan plan = assemble_plan(v, sigma, w1, w2, c1, graph, power, lambda_base);
  plan.validate();
  return plan;
}

// ---------------------------------------------------------------- generator

Generator::Kind Generator::kind() const noexcept {
  switch (backend_.index()) {
    case 0: return Kind::kTable;
    case 1: return Kind::kIdentity;
    case 2: return Kind::kRandom;
    case 3: return Kind::kWalk;
    case 4: return Kind::kReedSolomon;
    default: return Kind::kExplicit;
  }
}

std::string Generator::kind_name() const {
  switch (kind()) {
    case Kind::kTable: return "table";
    case Kind::kIdentity: return "identity";
    case Kind::kRandom: return "random";
    case Kind::kWalk: return "walk";
    case Kind::kReedSolomon: return "reed-solomon";
    case Kind::kExplicit: return "explicit";
  }
  return "unknown";
}

void Generator::row_into(Index i, std::span<std::uint32_t> out) const {
  if (i >= params_.u) throw InputError("generator index " + index_to_string(i) + " out of range");
  if (out.size() != params_.w) throw InputError("row buffer has wrong length");
  const std::uint32_t v = params_.v;
  const unsigned w = params_.w;
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Table> || std::is_same_v<T, Random>) {
          const auto offset = static_cast<std::size_t>(i) * w;
          std::copy_n(b.entries.begin() + static_cast<std::ptrdiff_t>(offset), w, out.begin());
        } else if constexpr (std::is_same_v<T, Identity>) {
          Index rest = i;
          for (unsigned k = 0; k < w; ++k) {
            out[k] = static_cast<std::uint32_t>(rest % v);
            rest /= v;
          }
        } else if constexpr (std::is_same_v<T, Walk>) {
          const auto index = expander::WalkIndex::decode(i, v, b.graph->degree(), w);
          expander::walk_into(*b.graph, index, out);
        } else if constexpr (std::is_same_v<T, ReedSolomon>) {
          b.code->encode_into(b.code->index_to_message(i), out);
        } else {
          const auto& plan = *b.plan;
          const auto index = expander::WalkIndex::decode(i, v, plan.expander->degree(), plan.w1);
          expander::walk_into(*plan.expander, index, out.first(plan.w1));
          plan.rs->encode_into(plan.rs->index_to_message(i), out.subspan(plan.w1));
        }
      },
      backend_);
}

std::vector<std::uint32_t> Generator::row(Index i) const {
  std::vector<std::uint32_t> out(params_.w);
  row_into(i, out);
  return out;
}

std::vector<std::uint32_t> Generator::materialize(Index cap) const {
  if (params_.u > cap) {
    throw ResourceError("materializing " + index_to_string(params_.u) + " rows exceeds the cap of " +
                        index_to_string(cap));
  }
  if (const auto* t = std::get_if<Table>(&backend_)) return t->entries;
  if (const auto* r = std::get_if<Random>(&backend_)) return r->entries;
  const auto u = static_cast<std::size_t>(params_.u);
  std::vector<std::uint32_t> out(u * params_.w);
  for (std::size_t i = 0; i < u; ++i) {
    row_into(i, std::span<std::uint32_t>(out).subspan(i * params_.w, params_.w));
  }
  return out;
}

std::optional<std::uint64_t> Generator::seed() const {
  if (const auto* r = std::get_if<Random>(&backend_)) return r->seed;
  return std::nullopt;
}

const ExplicitGeneratorPlan* Generator::plan() const {
  if (const auto* e = std::get_if<Explicit>(&backend_)) return e->plan.get();
  return nullptr;
}

const expander::ExpanderGraph* Generator::walk_graph() const {
  if (const auto* w = std::get_if<Walk>(&backend_)) return w->graph.get();
  if (const auto* e = std::get_if<Explicit>(&backend_)) return e->plan->expander.get();
  return nullptr;
}

const galois::RSCode* Generator::rs_code() const {
  if (const auto* r = std::get_if<ReedSolomon>(&backend_)) return r->code.get();
  if (const auto* e = std::get_if<Explicit>(&backend_)) return e->plan->rs.get();
  return nullptr;
}

Generator Generator::from_table(Params params, std::vector<std::uint32_t> entries) {
  params.validate();
  if (Index{entries.size()} != params.u * params.w) throw InputError("table size does not match u * w");
  for (std::size_t idx = 0; idx < entries.size(); ++idx) {
    if (entries[idx] >= params.v) {
      throw InputError("entry in row " + std::to_string(idx / params.w) + " is outside [0, v)");
    }
  }
  return Generator(std::move(params), Table{std::move(entries)});
}

Generator build_identity(std::uint32_t v, std::uint32_t w, const Rational& sigma, Index cap) {
  Index u = 0;
  if (v < 1 || w < 1) throw InputError("v and w must be at least 1");
  if (!checked_pow(v, w, u) || u > cap) {
    throw ResourceError("identity generator needs v^w <= " + index_to_string(cap) + " rows");
  }
  Params p{u, v, w, sigma};
  p.validate();
  return Generator(std::move(p), Generator::Identity{});
}

Generator build_random(const Params& params, std::uint64_t seed, Index cap) {
  params.validate();
  if (params.u > cap) throw ResourceError("random generator with more than " + index_to_string(cap) + " rows");
  RandomStream rng(seed, 0);
  std::vector<std::uint32_t> entries(static_cast<std::size_t>(params.u) * params.w);
  for (auto& e : entries) e = static_cast<std::uint32_t>(rng.below(params.v));
  return Generator(params, Generator::Random{seed, std::move(entries)});
}

Generator build_walk(std::shared_ptr<const expander::ExpanderGraph> graph, unsigned w, const Rational& sigma) {
  if (!graph) throw InputError("walk generator needs a graph");
  if (w < 1) throw InputError("walk length must be at least 1");
  Params p{expander::walk_index_space(graph->num_vertices(), graph->degree(), w), graph->num_vertices(), w, sigma};
  p.validate();
  return Generator(std::move(p), Generator::Walk{std::move(graph)});
}

Generator build_reed_solomon(std::uint32_t v, unsigned ell, unsigned w, const Rational& sigma) {
  check_prime_field(v);
  auto code = std::make_shared<const galois::RSCode>(galois::PrimeField(v), ell, w, galois::RsLayout::kNoConstant);
  Params p{code->num_messages(), v, w, sigma};
  p.validate();
  return Generator(std::move(p), Generator::ReedSolomon{std::move(code)});
}

Generator build_explicit(const ExplicitGeneratorPlan& plan) {
  plan.validate();
  Params p{plan.u, plan.v, plan.w, plan.sigma};
  p.validate();
  return Generator(std::move(p), Generator::Explicit{std::make_shared<const ExplicitGeneratorPlan>(plan)});
}

// ---------------------------------------------------------------- design

namespace {

// max_s #{k : a_k - b_k = s mod v}, and the maximizing s.
std::pair<unsigned, std::uint32_t> max_agreement(const std::uint32_t* a, const std::uint32_t* b, unsigned w,
                                                 std::uint32_t v, std::vector<std::uint32_t>& scratch) {
  for (unsigned k = 0; k < w; ++k) scratch[k] = a[k] >= b[k] ? a[k] - b[k] : a[k] + v - b[k];
  std::sort(scratch.begin(), scratch.begin() + w);
  unsigned best = 0;
  std::uint32_t shift = 0;
  for (unsigned k = 0; k < w;) {
    unsigned run = 1;
    while (k + run < w && scratch[k + run] == scratch[k]) ++run;
    if (run > best) {
      best = run;
      shift = scratch[k];
    }
    k += run;
  }
  return {best, shift};
}

struct PairMax {
  unsigned value = 0;
  std::optional<DesignWitness> witness;
};

void absorb(PairMax& into, const PairMax& other) {
  if (other.witness && (!into.witness || other.value > into.value)) into = other;
}

}  // namespace

DesignReport check_design(const Generator& g, const DesignOptions& options) {
  const Params& p = g.params();
  DesignReport report;
  const unsigned w = p.w;
  if (p.u == 1) {
    report.d = w;
    return report;
  }
  const Index pairs = p.u * (p.u - 1) / 2;
  const std::uint32_t v = p.v;
  PairMax overall;
  if (pairs <= options.pair_cap) {
    const std::vector<std::uint32_t> table = g.materialize(options.enumeration_cap);
    const auto u = static_cast<std::size_t>(p.u);
    std::vector<PairMax> per_row(u);
    parallel_for(u - 1, options.threads, [&](std::size_t i) {
      std::vector<std::uint32_t> scratch(w);
      PairMax local;
      for (std::size_t j = i + 1; j < u; ++j) {
        // |S(y_i, s) ∩ S(y_j, s')| counts columns with y_i - y_j = s' - s.
        const auto [value, shift] = max_agreement(&table[i * w], &table[j * w], w, v, scratch);
        if (!local.witness || value > local.value) local = PairMax{value, DesignWitness{i, j, shift}};
      }
      per_row[i] = local;
    });
    for (const auto& r : per_row) absorb(overall, r);
    report.pairs_checked = static_cast<std::uint64_t>(pairs);
  } else {
    if (!options.allow_sampling) {
      throw ResourceError(index_to_string(pairs) + " row pairs exceed the exact budget of " +
                          index_to_string(options.pair_cap) + "; enable sampled mode");
    }
    if (!(options.delta > 0.0 && options.delta < 1.0)) throw InputError("delta must lie in (0,1)");
    constexpr std::uint64_t kBlock = 4096;
    const std::uint64_t blocks = (options.samples + kBlock - 1) / kBlock;
    std::vector<PairMax> per_block(blocks);
    parallel_for(blocks, options.threads, [&](std::size_t blk) {
      RandomStream rng(options.seed, blk);
      std::vector<std::uint32_t> a(w), b(w), scratch(w);
      PairMax local;
      const std::uint64_t count = std::min(kBlock, options.samples - blk * kBlock);
      for (std::uint64_t s = 0; s < count; ++s) {
        const Index i = uniform_index(rng, p.u);
        Index j = uniform_index(rng, p.u - 1);
        if (j >= i) ++j;
        g.row_into(i, a);
        g.row_into(j, b);
        const auto [value, shift] = max_agreement(a.data(), b.data(), w, v, scratch);
        if (!local.witness || value > local.value) local = PairMax{value, DesignWitness{i, j, shift}};
      }
      per_block[blk] = local;
    });
    for (const auto& r : per_block) absorb(overall, r);
    report.exact = false;
    report.pairs_checked = options.samples;
    report.delta = options.delta;
    report.unseen_fraction_bound = std::log(1.0 / options.delta) / static_cast<double>(options.samples);
  }
  report.max_intersection = overall.value;
  report.witness = overall.witness;
  report.d = w - overall.value;
  return report;
}

// ---------------------------------------------------------------- sampler

std::string to_string(TestFamily family) {
  switch (family) {
    case TestFamily::kSparseUniform: return "sparse-uniform";
    case TestFamily::kColumnSpike: return "column-spike";
    case TestFamily::kRowInterval: return "row-interval";
  }
  return "unknown";
}

std::uint64_t TestFunction::support_size() const {
  return static_cast<std::uint64_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

namespace {

std::uint64_t max_support(std::uint32_t v, double mu_cap) {
  const auto s = static_cast<std::uint64_t>(std::floor(mu_cap * v + 1e-9));
  if (s < 1) throw InputError("mu_cap admits no nonzero test function at this v");
  return s;
}

// Distinct values of [0, range) by rejection; callers keep count <= range/2 or small.
std::vector<std::uint64_t> distinct_values(RandomStream& rng, std::uint64_t range, std::uint64_t count) {
  std::vector<std::uint8_t> taken(range, 0);
  std::vector<std::uint64_t> out;
  out.reserve(count);
  while (out.size() < count) {
    const std::uint64_t x = rng.below(range);
    if (!taken[x]) {
      taken[x] = 1;
      out.push_back(x);
    }
  }
  return out;
}

}  // namespace

TestFunction draw_test_function(TestFamily family, std::uint32_t v, std::uint32_t w, double mu_cap,
                                std::uint64_t master_seed, std::uint64_t trial) {
  const std::uint64_t smax = std::min<std::uint64_t>(max_support(v, mu_cap), std::uint64_t{v} * w);
  RandomStream rng(master_seed, trial);
  TestFunction f{v, w, std::vector<std::uint8_t>(std::size_t{v} * w, 0)};
  switch (family) {
    case TestFamily::kSparseUniform: {
      const std::uint64_t s = 1 + rng.below(smax);
      for (auto cell : distinct_values(rng, std::uint64_t{v} * w, s)) f.bits[cell] = 1;
      break;
    }
    case TestFamily::kColumnSpike: {
      const auto column = rng.below(w);
      const std::uint64_t s = 1 + rng.below(std::min<std::uint64_t>(smax, v));
      for (auto value : distinct_values(rng, v, s)) f.bits[column * v + value] = 1;
      break;
    }
    case TestFamily::kRowInterval: {
      // The same cyclic run of rows in a few columns, as a coalition holding
      // whole rows of the matrix would produce.
      const std::uint64_t columns = 1 + rng.below(std::min<std::uint64_t>(w, smax));
      const std::uint64_t length = 1 + rng.below(std::min<std::uint64_t>(smax / columns, v));
      const std::uint64_t start = rng.below(v);
      for (auto column : distinct_values(rng, w, columns)) {
        for (std::uint64_t r = 0; r < length; ++r) f.bits[column * v + (start + r) % v] = 1;
      }
      break;
    }
  }
  return f;
}

namespace {

std::vector<double> alpha_powers(double alpha, unsigned w) {
  std::vector<double> out(w + 1, 1.0);
  for (unsigned k = 1; k <= w; ++k) out[k] = out[k - 1] * alpha;
  out[0] = 0.0;  // the moment only counts F != 0
  return out;
}

double moment_from_table(const std::vector<std::uint32_t>& table, Index u, const TestFunction& f,
                         const std::vector<double>& powers) {
  const unsigned w = f.w;
  const auto rows = static_cast<std::size_t>(u);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::uint32_t* y = &table[i * w];
    unsigned count = 0;
    for (unsigned k = 0; k < w; ++k) count += f.bits[std::size_t{k} * f.v + y[k]];
    acc += powers[count];
  }
  return static_cast<double>(acc / static_cast<long double>(rows));
}

// Exact moment over all walks: a0 tracks walks with F = 0 so far, a1 the
// alpha^F mass of walks with F >= 1, both indexed by the current vertex.
double moment_by_transfer(const expander::ExpanderGraph& graph, const TestFunction& f, double alpha) {
  const std::uint32_t v = f.v;
  std::vector<double> a0(v), a1(v), b0(v), b1(v);
  for (std::uint32_t x = 0; x < v; ++x) {
    const bool hit = f.at(0, x);
    a0[x] = hit ? 0.0 : 1.0 / v;
    a1[x] = hit ? alpha / v : 0.0;
  }
  for (unsigned k = 1; k < f.w; ++k) {
    graph.apply_walk_transpose(a0, b0);
    graph.apply_walk_transpose(a1, b1);
    for (std::uint32_t x = 0; x < v; ++x) {
      if (f.at(k, x)) {
        a1[x] = alpha * (b0[x] + b1[x]);
        a0[x] = 0.0;
      } else {
        a0[x] = b0[x];
        a1[x] = b1[x];
      }
    }
  }
  double total = 0.0;
  for (double e : a1) total += e;
  return total;
}

void check_test_shape(const Generator& g, const TestFunction& f) {
  if (f.v != g.params().v || f.w != g.params().w || f.bits.size() != std::size_t{f.v} * f.w) {
    throw InputError("test function does not match the generator shape");
  }
}

}  // namespace

double sampler_moment(const Generator& g, const TestFunction& f, double alpha, Index enumeration_cap) {
  check_test_shape(g, f);
  if (g.kind() == Generator::Kind::kWalk) return moment_by_transfer(*g.walk_graph(), f, alpha);
  const auto table = g.materialize(enumeration_cap);
  return moment_from_table(table, g.params().u, f, alpha_powers(alpha, f.w));
}

SamplerReport check_sampler(const Generator& g, const SamplerOptions& options) {
  if (!(options.alpha > 1.0)) throw InputError("alpha must exceed 1");
  if (!(options.beta >= 1.0)) throw InputError("beta must be at least 1");
  if (options.trials < 1) throw InputError("at least one trial is required");
  if (options.families.empty()) throw InputError("no test families selected");
  const double mu_cap = options.mu_cap.value_or(1.0 / options.alpha);
  if (!(mu_cap > 0.0) || options.alpha * mu_cap > 1.0 + 1e-12) {
    throw InputError("mu_cap must satisfy 0 < alpha * mu_cap <= 1");
  }
  const Params& p = g.params();
  max_support(p.v, mu_cap);

  SamplerReport report;
  report.alpha = options.alpha;
  report.beta = options.beta;
  report.k_constant = options.k_constant;
  report.mu_cap = mu_cap;
  report.trials = options.trials;

  const bool by_transfer = g.kind() == Generator::Kind::kWalk;
  report.method = by_transfer ? "transfer-matrix" : "enumeration";
  std::vector<std::uint32_t> table;
  if (!by_transfer) table = g.materialize(options.enumeration_cap);
  const auto powers = alpha_powers(options.alpha, p.w);

  std::vector<SamplerTestResult> results(options.trials);
  parallel_for(options.trials, options.threads, [&](std::size_t t) {
    const TestFamily family = options.families[t % options.families.size()];
    const TestFunction f = draw_test_function(family, p.v, p.w, mu_cap, options.seed, t);
    SamplerTestResult r;
    r.trial = t;
    r.family = family;
    r.support = f.support_size();
    r.mu = f.mean();
    r.moment = by_transfer ? moment_by_transfer(*g.walk_graph(), f, options.alpha)
                           : moment_from_table(table, p.u, f, powers);
    r.ratio = r.moment / (options.alpha * r.mu);
    results[t] = r;
  });
  const double threshold = options.k_constant * options.beta;
  for (const auto& r : results) {
    if (r.trial == 0 || r.ratio > report.worst_ratio) {
      report.worst_ratio = r.ratio;
      report.worst = r;
    }
    if (r.ratio > threshold) report.violations.push_back(r);
  }
  return report;
}

// ---------------------------------------------------------------- search

namespace {

bool better(const SearchResult& a, const SearchResult& b) {
  if (a.design.d != b.design.d) return a.design.d > b.design.d;
  return a.sampler.worst_ratio < b.sampler.worst_ratio;
}

}  // namespace

SearchResult search_random(const Params& params, unsigned d_target, std::uint64_t seed, const SearchOptions& options) {
  params.validate();
  if (d_target > params.w) throw InputError("d_target exceeds w; no generator can be a d-design");
  if (options.max_attempts < 1) throw InputError("max_attempts must be at least 1");
  if (d_target >= 1) {
    // Rows y and y + c (all entries shifted by c) give identical shifted
    // block sets, so more than v^(w-1) rows force a full collision.
    Index classes = 0;
    if (checked_pow(params.v, params.w - 1, classes) && params.u > classes) {
      throw SearchFailure("u = " + index_to_string(params.u) + " exceeds the v^(w-1) = " + index_to_string(classes) +
                              " shift classes; every generator has d = 0",
                          std::nullopt, true);
    }
  }
  SamplerOptions sampler = options.sampler;
  sampler.alpha = 2.0;
  std::optional<SearchResult> best;
  for (unsigned attempt = 0; attempt < options.max_attempts; ++attempt) {
    const std::uint64_t attempt_seed = substream_seed(seed, attempt);
    Generator g = build_random(params, attempt_seed);
    SearchResult candidate{g, attempt + 1, attempt_seed, check_design(g, options.design), {}};
    candidate.sampler.worst_ratio = std::numeric_limits<double>::infinity();
    if (candidate.design.d >= d_target) {
      candidate.sampler = check_sampler(g, sampler);
      if (candidate.sampler.passes()) return candidate;
    }
    if (!best || better(candidate, *best)) best = std::move(candidate);
  }
  throw SearchFailure("no candidate passed after " + std::to_string(options.max_attempts) + " attempts",
                      std::move(best), false);
}

// ---------------------------------------------------------------- files

namespace {

constexpr const char* kTableHeader = "RESGEN 1";
constexpr const char* kPlanHeader = "RESGEN-PLAN 1";

void write_params(const Params& p, std::ostream& out) {
  out << index_to_string(p.u) << ' ' << p.v << ' ' << p.w << ' ' << p.sigma.get_num().get_str() << ' '
      << p.sigma.get_den().get_str() << '\n';
}

void write_table(const Generator& g, std::ostream& out) {
  const Params& p = g.params();
  out << kTableHeader << '\n';
  write_params(p, out);
  std::vector<std::uint32_t> row(p.w);
  for (Index i = 0; i < p.u; ++i) {
    g.row_into(i, row);
    for (unsigned k = 0; k < p.w; ++k) out << (k ? " " : "") << row[k];
    out << '\n';
  }
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}
  std::string next(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) return line;
    }
    throw ParseError(line_ + 1, std::string("unexpected end of file, expected ") + what);
  }
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::vector<std::string> split(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::uint64_t parse_u64(const std::string& tok, std::size_t line, const char* what) {
  try {
    const Index x = parse_index(tok);
    if (x > ~std::uint64_t{0}) throw InputError("too large");
    return static_cast<std::uint64_t>(x);
  } catch (const InputError&) {
    throw ParseError(line, std::string("invalid ") + what + " '" + tok + "'");
  }
}

Params parse_params(LineReader& reader) {
  const auto toks = split(reader.next("parameter line"));
  const std::size_t line = reader.line();
  if (toks.size() != 5) throw ParseError(line, "parameter line needs 'u v w sigma_num sigma_den'");
  Params p;
  try {
    p.u = parse_index(toks[0]);
  } catch (const InputError&) {
    throw ParseError(line, "invalid u '" + toks[0] + "'");
  }
  const auto v = parse_u64(toks[1], line, "v");
  const auto w = parse_u64(toks[2], line, "w");
  if (v > 0xffffffffULL || w > 0xffffffffULL) throw ParseError(line, "v or w out of range");
  p.v = static_cast<std::uint32_t>(v);
  p.w = static_cast<std::uint32_t>(w);
  try {
    p.sigma = parse_rational(toks[3] + "/" + toks[4]);
    p.validate();
  } catch (const InputError& e) {
    throw ParseError(line, e.what());
  }
  return p;
}

Generator read_table(LineReader& reader) {
  const Params p = parse_params(reader);
  if (p.u > kDefaultEnumerationCap) throw ParseError(reader.line(), "table has more rows than the enumeration cap");
  std::vector<std::uint32_t> entries;
  entries.reserve(static_cast<std::size_t>(p.u) * p.w);
  for (Index i = 0; i < p.u; ++i) {
    const auto toks = split(reader.next("generator row"));
    const std::string row_name = "row " + index_to_string(i);
    if (toks.size() != p.w) {
      throw ParseError(reader.line(), row_name + " has " + std::to_string(toks.size()) + " entries, expected w");
    }
    for (const auto& tok : toks) {
      const auto x = parse_u64(tok, reader.line(), "entry");
      if (x >= p.v) throw ParseError(reader.line(), row_name + " has entry " + tok + " >= v");
      entries.push_back(static_cast<std::uint32_t>(x));
    }
  }
  return Generator::from_table(p, std::move(entries));
}

Generator read_plan(LineReader& reader) {
  const Params p = parse_params(reader);
  const auto toks = split(reader.next("backend line"));
  const std::size_t line = reader.line();
  auto expect_args = [&](std::size_t n) {
    if (toks.size() != n + 1) throw ParseError(line, "backend '" + toks[0] + "' expects " + std::to_string(n) + " arguments");
  };
  auto arg = [&](std::size_t k, const char* what) { return parse_u64(toks[k], line, what); };
  std::optional<Generator> g;
  try {
    if (toks[0] == "identity") {
      expect_args(0);
      g = build_identity(p.v, p.w, p.sigma);
    } else if (toks[0] == "random") {
      expect_args(1);
      g = build_random(p, arg(1, "seed"));
    } else if (toks[0] == "walk") {
      expect_args(2);
      if (toks[1] != "shift-inverse") throw ParseError(line, "unknown walk graph '" + toks[1] + "'");
      const auto k = static_cast<unsigned>(arg(2, "power"));
      auto graph = std::make_shared<const expander::ExpanderGraph>(expander::power(expander::build_shift_inverse(p.v), k));
      g = build_walk(graph, p.w, p.sigma);
    } else if (toks[0] == "reed-solomon") {
      expect_args(1);
      g = build_reed_solomon(p.v, static_cast<unsigned>(arg(1, "ell")), p.w, p.sigma);
    } else if (toks[0] == "explicit") {
      expect_args(4);
      const auto plan = make_plan(p.v, p.sigma, static_cast<unsigned>(arg(1, "w1")), static_cast<unsigned>(arg(2, "w2")),
                                  static_cast<unsigned>(arg(3, "c1")), static_cast<unsigned>(arg(4, "power")));
      g = build_explicit(plan);
    } else {
      throw ParseError(line, "unknown backend '" + toks[0] + "'");
    }
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(line, e.what());
  }
  const Params& q = g->params();
  if (q.u != p.u || q.v != p.v || q.w != p.w || q.sigma != p.sigma) {
    throw ParseError(line, "backend parameters disagree with the header line");
  }
  return *g;
}

}  // namespace

void serialize(const Generator& g, std::ostream& out, bool force_table) {
  const Params& p = g.params();
  std::string backend;
  switch (g.kind()) {
    case Generator::Kind::kTable: break;
    case Generator::Kind::kIdentity: backend = "identity"; break;
    case Generator::Kind::kRandom: backend = "random " + std::to_string(*g.seed()); break;
    case Generator::Kind::kWalk:
      if (g.walk_graph()->name() == "shift-inverse") {
        backend = "walk shift-inverse " + std::to_string(g.walk_graph()->exponent());
      }
      break;
    case Generator::Kind::kReedSolomon: backend = "reed-solomon " + std::to_string(g.rs_code()->ell()); break;
    case Generator::Kind::kExplicit: {
      const auto& plan = *g.plan();
      backend = "explicit " + std::to_string(plan.w1) + " " + std::to_string(plan.w2) + " " + std::to_string(plan.c1) +
                " " + std::to_string(plan.power);
      break;
    }
  }
  if (force_table || backend.empty()) {
    if (p.u > kDefaultEnumerationCap) throw ResourceError("generator is too large to write as a table");
    write_table(g, out);
    return;
  }
  out << kPlanHeader << '\n';
  write_params(p, out);
  out << backend << '\n';
}

Generator deserialize(std::istream& in) {
  LineReader reader(in);
  std::string header = reader.next("header");
  while (!header.empty() && (header.back() == ' ' || header.back() == '\t')) header.pop_back();
  if (header == kTableHeader) return read_table(reader);
  if (header == kPlanHeader) return read_plan(reader);
  const auto toks = split(header);
  if (!toks.empty() && (toks[0] == "RESGEN" || toks[0] == "RESGEN-PLAN")) {
    throw ParseError(reader.line(), "unsupported format version in header '" + header + "'");
  }
  throw ParseError(reader.line(), "missing RESGEN header");
}

}  // namespace resil::generator
