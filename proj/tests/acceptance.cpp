#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "resil/analysis.hpp"
#include "resil/balance.hpp"
#include "resil/circuit.hpp"
#include "resil/expander.hpp"
#include "resil/generator.hpp"
#include "resil/rng.hpp"

using namespace resil;

namespace {

// Tolerances and budgets, fixed here so every run judges the same way.
constexpr double kOracleSeconds = 10.0;
constexpr double kSolveSeconds = 5.0;
constexpr double kDesignSeconds = 60.0;
constexpr double kStderrMultiple = 4.0;
constexpr std::uint64_t kInfluenceSamples = 1'000'000;
constexpr double kWorkedTolerance = 1e-4;
constexpr double kFloatSlack = 1e-12;
constexpr double kLambdaTolerance = 1e-6;
constexpr double kSamplerRatioCap = 16.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

// P[f = 1] by walking all 2^n inputs, 64 at a time.
Rational enumerate_mean(const circuit::BooleanFunction& f, const Rational& sigma) {
  const std::uint64_t n = f.num_inputs();
  std::vector<std::uint64_t> base(n, 0);
  std::vector<std::uint64_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const auto hist =
      circuit::popcount_histogram(base, all, [&f](std::span<const std::uint64_t> in) { return f.eval_words(in); });
  return circuit::weigh_histogram(hist, sigma);
}

Rational assignment_weight(std::uint64_t a, std::uint64_t bits, const Rational& sigma) {
  const auto ones = static_cast<unsigned>(std::popcount(a));
  return pow(sigma, ones) * pow(1 - sigma, static_cast<unsigned>(bits - ones));
}

// P[no term fires] for terms given as variable masks over at most 20 variables.
Rational zero_by_masks(const std::vector<std::uint64_t>& masks, unsigned vars, const Rational& sigma) {
  std::vector<std::uint64_t> hist(vars + 1, 0);
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << vars); ++a) {
    bool fires = false;
    for (auto m : masks) fires = fires || (a & m) == m;
    if (!fires) ++hist[static_cast<unsigned>(std::popcount(a))];
  }
  return circuit::weigh_histogram(hist, sigma);
}

bool scalar_eval(const circuit::BooleanFunction& f, std::uint64_t a) {
  std::vector<std::uint8_t> bits(f.num_inputs());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = (a >> i) & 1;
  return f.eval(bits);
}

// I_Q(f) under the uniform distribution, from the truth table alone.
Rational scalar_influence(const std::vector<bool>& table, std::uint64_t n, std::uint64_t coalition_mask) {
  std::vector<std::uint64_t> free;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!((coalition_mask >> i) & 1)) free.push_back(i);
  }
  std::uint64_t unfixed = 0;
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << free.size()); ++a) {
    std::uint64_t x = 0;
    for (std::size_t k = 0; k < free.size(); ++k) x |= ((a >> k) & 1) << free[k];
    bool seen[2] = {false, false};
    for (std::uint64_t s = coalition_mask;; s = (s - 1) & coalition_mask) {
      seen[table[x | s]] = true;
      if (s == 0) break;
    }
    if (seen[0] && seen[1]) ++unfixed;
  }
  return Rational(BigInt(unfixed), BigInt(1) << static_cast<mp_bitcnt_t>(free.size()));
}

std::vector<bool> truth_table(const circuit::BooleanFunction& f) {
  std::vector<bool> table(std::size_t{1} << f.num_inputs());
  for (std::uint64_t a = 0; a < table.size(); ++a) table[a] = scalar_eval(f, a);
  return table;
}

// ---------------------------------------------------------------- 1

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  unsigned cases = 0;
  for (std::uint32_t v = 1; v <= 20; ++v) {
    for (std::uint32_t w = 1; v * w <= 20; ++w) {
      const auto tribes = circuit::make_tribes(v, w);
      for (const Rational sigma : {Rational(1, 2), Rational(1, 4)}) {
        const Rational formula = 1 - pow(1 - pow(sigma, w), v);
        if (enumerate_mean(*tribes, sigma) != formula) {
          return {false, "mismatch at v=" + std::to_string(v) + " w=" + std::to_string(w) + " sigma=" + to_string(sigma)};
        }
        ++cases;
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {elapsed < kOracleSeconds,
          std::to_string(cases) + " (v, w, sigma) cases equal exactly; " + fmt(elapsed, 3) + " s (limit " +
              fmt(kOracleSeconds) + " s)"};
}

// ---------------------------------------------------------------- 2

Outcome bias_independent() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::string worst_at;
  bool ok = true;
  for (const Index u : {Index{1} << 6, Index{1} << 10, Index{1} << 14}) {
    for (unsigned w : {2U, 3U, 4U}) {
      const auto t = analysis::solve_v(u, w, Rational(1, 2));
      const double bound = 8.0 * std::ldexp(1.0, -static_cast<int>(w));
      const double residual = std::max(std::abs(t.bias.upper - 0.5), std::abs(t.bias.lower - 0.5));
      if (residual > bound) ok = false;
      if (residual / bound > worst) {
        worst = residual / bound;
        worst_at = "u=" + index_to_string(u) + " w=" + std::to_string(w) + " v=" + std::to_string(t.v);
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {ok && elapsed < kSolveSeconds, "worst |bias-1/2| / (8 sigma^w) = " + fmt(worst, 4) + " at " + worst_at +
                                             "; " + fmt(elapsed, 3) + " s (limit " + fmt(kSolveSeconds) + " s)"};
}

// ---------------------------------------------------------------- 3

Outcome influence_soundness() {
  const auto plan = generator::make_plan(13, Rational(1, 2), 1, 2, 1, 1);
  const auto g = generator::build_explicit(plan);
  if (g.params().w != 3 || g.params().u > 50) return {false, "desk-scale plan is not v=13, w=3, u<=50"};
  const auto c = circuit::build_circuit(g);
  const Rational sigma = g.params().sigma;
  RandomStream rng(3031);
  double worst_excess = -1.0;
  int failures = 0;
  for (std::uint64_t t = 0; t < 30; ++t) {
    const std::uint64_t q = 1 + rng.below(6);
    const auto coalition = circuit::Coalition::random(c->num_inputs(), q, substream_seed(3031, t));
    const auto mc = analysis::influence_mc(*c, coalition, sigma, kInfluenceSamples, substream_seed(3032, t), 4);
    const double bound = analysis::influence_analytic_bound(*c, coalition, sigma).point;
    if (mc.point > bound + kStderrMultiple * mc.std_error) ++failures;
    worst_excess = std::max(worst_excess, mc.point - bound - kStderrMultiple * mc.std_error);
  }
  return {failures == 0, "explicit C_G u=" + index_to_string(g.params().u) + " v=13 w=3; " + std::to_string(failures) +
                             "/30 coalitions above bound + 4 stderr; max(mc - bound - 4 stderr) = " + fmt(worst_excess, 4)};
}

// True when the per-row union bound is tight: at most one hit term is
// partially covered, or some term lies entirely inside Q.
bool union_bound_tight(const circuit::ResilientCircuit& c, const circuit::Coalition& q) {
  unsigned partial = 0;
  for (std::uint32_t j = 0; j < c.params().v; ++j) {
    unsigned hit = 0;
    for (auto cell : c.term(0, j)) hit += q.contains(cell);
    if (hit == c.params().w) return true;
    if (hit > 0) ++partial;
  }
  return partial <= 1;
}

Outcome influence_exact_at_u1() {
  RandomStream rng(3033);
  const std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes{{5, 3}, {7, 2}, {6, 3}, {4, 4}, {13, 1}};
  int equal = 0, predicted = 0, agree_with_prediction = 0;
  for (std::uint64_t t = 0; t < 30; ++t) {
    const auto [v, w] = shapes[t % shapes.size()];
    const auto c = circuit::make_tribes(v, w);
    const std::uint64_t q = 1 + rng.below(6);
    const auto coalition = circuit::Coalition::random(c->num_inputs(), q, substream_seed(3033, t));
    const Rational sigma(1, 2);
    const auto exact = analysis::influence_exact(*c, coalition, sigma);
    const auto bound = analysis::influence_analytic_bound(*c, coalition, sigma);
    const bool same = *exact.exact == *bound.exact;
    const bool tight = union_bound_tight(*c, coalition);
    equal += same;
    predicted += tight;
    agree_with_prediction += same == tight;
  }
  return {equal == 30, std::to_string(equal) + "/30 u=1 coalitions have exact = bound; union bound predicted tight in " +
                           std::to_string(predicted) + "/30 and the prediction matches in " +
                           std::to_string(agree_with_prediction) + "/30"};
}

// ---------------------------------------------------------------- 4

Outcome janson_sandwich() {
  RandomStream rng(4041);
  int outside = 0;
  for (int trial = 0; trial < 100; ++trial) {
    analysis::TermSystem sys;
    const unsigned vars = 4 + static_cast<unsigned>(rng.below(17));
    sys.num_vars = vars;
    const unsigned width = 1 + static_cast<unsigned>(rng.below(std::min(3U, vars)));
    const auto count = 1 + rng.below(8);
    std::vector<std::uint64_t> masks;
    for (std::uint64_t t = 0; t < count; ++t) {
      std::vector<std::uint64_t> term;
      while (term.size() < width) {
        const auto x = rng.below(vars);
        if (std::find(term.begin(), term.end(), x) == term.end()) term.push_back(x);
      }
      std::uint64_t mask = 0;
      for (auto x : term) mask |= std::uint64_t{1} << x;
      masks.push_back(mask);
      sys.terms.push_back(std::move(term));
    }
    const Rational sigma = trial % 2 ? Rational(1, 2) : Rational(1, 3);
    const Rational p = 1 - pow(sigma, width);
    if (p < Rational(1, 2)) return {false, "generated a system with p < 1/2"};
    const auto delta = analysis::compute_delta(sys, sigma);
    const auto b = analysis::janson_bounds(std::vector<Rational>(count, p), delta.delta);
    const double exact = to_double(zero_by_masks(masks, vars, sigma));
    if (exact < b.lower - kFloatSlack || exact > b.upper + kFloatSlack) ++outside;
  }
  analysis::TermSystem worked{3, {{0, 1}, {1, 2}}};
  const Rational half(1, 2);
  const auto d = analysis::compute_delta(worked, half);
  const auto w = analysis::janson_bounds(std::vector<Rational>(2, Rational(3, 4)), d.delta);
  const double exact = to_double(zero_by_masks({0b011, 0b110}, 3, half));
  const bool worked_ok = std::abs(w.lower - 0.5625) <= kWorkedTolerance && std::abs(exact - 0.625) <= kWorkedTolerance &&
                         std::abs(w.upper - 0.7207) <= kWorkedTolerance;
  return {outside == 0 && worked_ok, std::to_string(outside) + "/100 random systems outside [lower, upper]; worked example " +
                                         fmt(w.lower) + " <= " + fmt(exact) + " <= " + fmt(w.upper)};
}

// ---------------------------------------------------------------- 5

Outcome bonferroni_bracketing() {
  RandomStream rng(5051);
  constexpr unsigned kVars = 14;
  int bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng.below(10);
    std::vector<std::uint64_t> masks(m, 0);
    for (auto& mask : masks) {
      const auto width = 1 + rng.below(3);
      while (static_cast<std::uint64_t>(std::popcount(mask)) < width) mask |= std::uint64_t{1} << rng.below(kVars);
    }
    const analysis::JointProbability joint = [&](std::span<const std::size_t> s) {
      std::uint64_t all = 0;
      for (auto i : s) all |= masks[i];
      return pow(Rational(1, 2), static_cast<unsigned>(std::popcount(all)));
    };
    const Rational p_union = 1 - zero_by_masks(masks, kVars, Rational(1, 2));
    for (unsigned k : {1U, 3U, 5U}) {
      const auto r = analysis::bonferroni_bounds(m, k, joint);
      Rational partial = 0;
      for (unsigned j = 1; j <= k; ++j) {
        partial += (j % 2 ? 1 : -1) * r.s[j];
        if (j % 2 ? partial < p_union : partial > p_union) ++bad;
      }
      if (abs(p_union - r.truncated) > r.error_term) ++bad;
    }
  }
  return {bad == 0, std::to_string(bad) + " alternation or error-term violations over 100 systems x K in {1,3,5}"};
}

// ---------------------------------------------------------------- 6

Outcome design_properties() {
  const auto start = Clock::now();
  int bad = 0, rs_cases = 0;
  for (std::uint32_t v : {5U, 7U, 11U, 13U}) {
    for (unsigned ell : {1U, 2U, 3U}) {
      std::vector<unsigned> widths{ell + 1, ell + 2, std::min(v - 1, ell + 4)};
      std::sort(widths.begin(), widths.end());
      widths.erase(std::unique(widths.begin(), widths.end()), widths.end());
      for (unsigned w : widths) {
        if (w > v - 1) continue;
        const auto r = generator::check_design(generator::build_reed_solomon(v, ell, w));
        if (!r.exact || r.d != w - ell) ++bad;
        ++rs_cases;
      }
    }
  }
  std::string explicit_detail;
  for (const auto& [w1, w2, c1, power] : std::vector<std::array<unsigned, 4>>{{2, 3, 2, 1}, {2, 4, 2, 2}, {1, 3, 1, 1}}) {
    const auto plan = generator::make_plan(13, Rational(1, 2), w1, w2, c1, power);
    const auto r = generator::check_design(generator::build_explicit(plan));
    if (!r.exact || r.d < w2 - c1) ++bad;
    explicit_detail += " d=" + std::to_string(r.d) + ">=" + std::to_string(w2 - c1);
  }
  const double elapsed = seconds_since(start);
  return {bad == 0 && elapsed < kDesignSeconds, std::to_string(rs_cases) + " RS codes exactly (w-ell)-designs, explicit" +
                                                    explicit_detail + "; " + std::to_string(bad) + " failures; " +
                                                    fmt(elapsed, 3) + " s (limit " + fmt(kDesignSeconds) + " s)"};
}

// ---------------------------------------------------------------- 7

Outcome sampler_properties() {
  RandomStream rng(7071);
  const double alpha = 2.0;
  int bad = 0;
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto v = static_cast<std::uint32_t>(2 + rng.below(7));
    const auto w = static_cast<std::uint32_t>(1 + rng.below(4));
    const auto id = generator::build_identity(v, w);
    const auto f = generator::draw_test_function(static_cast<generator::TestFamily>(t % 3), v, w, 1.0 / alpha, 7072, t);
    const double mu = f.mean();
    if (alpha * mu > 1.0 + kFloatSlack) return {false, "drawn test function has alpha mu > 1"};
    const double moment = generator::sampler_moment(id, f, alpha);
    if (moment > 2.0 * alpha * mu + kFloatSlack) ++bad;
    worst = std::max(worst, moment / (2.0 * alpha * mu));
  }
  const auto powered = expander::power_to_target(expander::build_shift_inverse(101), 0.25);
  const double lambda = powered.graph.lambda_estimated().value_or(expander::estimate_lambda(powered.graph));
  const auto graph = std::make_shared<const expander::ExpanderGraph>(powered.graph);
  const auto walks = generator::build_walk(graph, 3);
  generator::SamplerOptions options;
  options.alpha = alpha;
  options.trials = 1000;
  options.seed = 7073;
  options.threads = 4;
  const auto report = generator::check_sampler(walks, options);
  const bool walk_ok = lambda <= 0.25 && report.worst_ratio <= kSamplerRatioCap;
  return {bad == 0 && walk_ok, "identity: " + std::to_string(bad) + "/200 above 2 alpha mu (max ratio " + fmt(worst, 4) +
                                   "); walk v=101 power " + std::to_string(powered.power) + " lambda " + fmt(lambda, 4) +
                                   " worst_ratio " + fmt(report.worst_ratio, 4) + " over " +
                                   std::to_string(report.trials) + " tests"};
}

// ---------------------------------------------------------------- 8

Outcome balanced_composition() {
  const std::vector<std::pair<std::string, std::string>> pairs{{"tribes:3:2", "or:2"}, {"tribes:2:2", "or:2"},
                                                               {"tribes:2:2", "or:1"}, {"tribes:4:2", "or:1"},
                                                               {"tribes:3:3", "or:1"}, {"majority:5", "or:3"}};
  std::vector<balance::BalancedComposite> instances;
  for (std::uint64_t n = balance::min_n_target(balance::SecondKind::kOr); n <= 10; ++n) {
    instances.push_back(
        balance::build_kkl_matcher(n, {balance::Mode::kExactDyadic, balance::SecondKind::kOr}).composite);
  }
  for (const auto& [a, b] : pairs) {
    instances.push_back(balance::compose_balanced(circuit::make_baseline(a), circuit::make_baseline(b),
                                                  balance::Mode::kExactDyadic));
  }
  int mean_bad = 0, lemma_bad = 0, singletons = 0;
  for (const auto& inst : instances) {
    const auto& f = *inst.circuit;
    const std::uint64_t nx = inst.c1->num_inputs(), ny = inst.c2->num_inputs(), total = f.num_inputs();
    if (nx > 10) return {false, "instance with more than 10 bits on the x side"};
    const auto table = truth_table(f);
    Rational mean = 0;
    for (std::uint64_t a = 0; a < table.size(); ++a) {
      if (table[a]) mean += assignment_weight(a, total, Rational(1, 2));
    }
    if (mean != Rational(1, 2)) ++mean_bad;
    const auto t1 = truth_table(*inst.c1);
    const auto t2 = truth_table(*inst.c2);
    const Rational p_c2_zero = 1 - Rational(BigInt(std::count(t2.begin(), t2.end(), true)), BigInt(t2.size()));
    for (std::uint64_t p = 0; p < total; ++p) {
      const Rational lhs = scalar_influence(table, total, std::uint64_t{1} << p);
      const Rational rhs = (p < nx ? scalar_influence(t1, nx, std::uint64_t{1} << p)
                                   : scalar_influence(t2, ny, std::uint64_t{1} << (p - nx))) +
                           p_c2_zero;
      if (lhs > rhs) ++lemma_bad;
      ++singletons;
    }
  }
  return {mean_bad == 0 && lemma_bad == 0,
          std::to_string(instances.size()) + " exact-dyadic instances: " + std::to_string(mean_bad) +
              " with E[C'] != 1/2, " + std::to_string(lemma_bad) + "/" + std::to_string(singletons) +
              " singletons above I(C1) + I(C2) + P[C2=0]"};
}

// ---------------------------------------------------------------- 9

Outcome expander_certification() {
  const double k4 = expander::estimate_lambda(expander::complete_graph(4, false));
  const double c4 = expander::estimate_lambda(expander::cycle_graph(4));
  const auto g = expander::build_shift_inverse(101);
  const double base = expander::estimate_lambda(g);
  double worst = -1.0;
  for (unsigned k = 1; k <= 4; ++k) {
    worst = std::max(worst, expander::estimate_lambda(expander::power(g, k)) - std::pow(base, k));
  }
  const bool ok = std::abs(k4 - 1.0 / 3.0) <= kLambdaTolerance && std::abs(c4 - 1.0) <= kLambdaTolerance &&
                  worst <= kLambdaTolerance;
  return {ok, "K4 " + fmt(k4, 10) + ", C4 " + fmt(c4, 10) + ", max lambda(g^k) - lambda(g)^k = " + fmt(worst, 3)};
}

// ---------------------------------------------------------------- 10

struct Run {
  int status = -1;
  std::string stdout_text;
  std::string file_text;
};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Run run_cli(const std::string& cli, const std::string& globals, const std::string& args,
            const std::filesystem::path& out_file) {
  std::filesystem::remove(out_file);
  const std::string command = "'" + cli + "' " + globals + " " + args + " 2>/dev/null";
  Run run;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return run;
  std::array<char, 4096> buffer{};
  std::size_t got = 0;
  while ((got = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) run.stdout_text.append(buffer.data(), got);
  const int raw = pclose(pipe);
  run.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  if (std::filesystem::exists(out_file)) run.file_text = read_file(out_file);
  return run;
}

Outcome cli_replay(const std::string& cli) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("resil-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto path = [&](const std::string& name) { return (dir / name).string(); };

  // Fixtures the audit and attack commands read.
  struct Fixture {
    std::string name, args;
  };
  const std::vector<Fixture> fixtures{{"rs.gen", "gen build-rs --v 7 --ell 2 --w 4"},
                                      {"rand.gen", "gen build-random --v 7 --w 2 --u 6"},
                                      {"small.gen", "gen build-random --v 5 --w 3 --u 4"}};
  for (const auto& f : fixtures) {
    const auto run = run_cli(cli, "--seed 11 --out " + path(f.name), f.args, path(f.name));
    if (run.status != 0) return {false, "fixture '" + f.args + "' exited " + std::to_string(run.status)};
  }

  struct Case {
    std::string args;
    bool writes_gen = false;
  };
  const std::vector<Case> cases{
      {"gen build-identity --v 3 --w 2", true},
      {"gen build-random --v 7 --w 2 --u 6", true},
      {"gen build-walk --v 13 --w 3 --power 2", true},
      {"gen build-rs --v 7 --ell 2 --w 4", true},
      {"gen build-explicit --v 13 --c1 2 --w1 2 --w2 3 --power 1", true},
      {"gen search --v 11 --w 3 --u 20 --d 1 --attempts 5 --trials 50", true},
      {"audit design --gen " + path("rs.gen")},
      {"audit sampler --gen " + path("rand.gen")},
      {"audit delta --gen " + path("rand.gen")},
      {"audit janson --gen " + path("small.gen")},
      {"audit bias-sandwich --gen " + path("rand.gen")},
      {"attack --gen " + path("rs.gen") + " --q 1,2,3 --strategy random"},
      {"attack --baseline tribes:20:3 --q 1,5,10 --strategy random --mode mc"},
      {"attack --baseline recmaj3:2 --q 0,2,4"},
      {"balance --n 6 --mode exact-dyadic --second or"},
      {"balance --n 64"},
  };
  const fs::path gen_out = dir / "out.gen";
  int mismatches = 0, errors = 0;
  std::string first_problem;
  for (const auto& c : cases) {
    std::vector<Run> runs;
    for (const char* threads : {"1", "1", "4", "4"}) {
      std::string globals = std::string("--seed 5 --samples 100000 --threads ") + threads;
      if (c.writes_gen) globals += " --out " + gen_out.string();
      runs.push_back(run_cli(cli, globals, c.args, gen_out));
    }
    for (const auto& r : runs) {
      if (r.status != 0 && r.status != 2) {
        ++errors;
        if (first_problem.empty()) first_problem = "'" + c.args + "' exited " + std::to_string(r.status);
        break;
      }
    }
    for (std::size_t i = 1; i < runs.size(); ++i) {
      if (runs[i].status != runs[0].status || runs[i].stdout_text != runs[0].stdout_text ||
          runs[i].file_text != runs[0].file_text) {
        ++mismatches;
        if (first_problem.empty()) first_problem = "'" + c.args + "' differs between runs";
        break;
      }
    }
  }
  fs::remove_all(dir);
  return {mismatches == 0 && errors == 0,
          std::to_string(cases.size()) + " commands x {1,1,4,4} threads: " + std::to_string(mismatches) +
              " not byte-identical, " + std::to_string(errors) + " errored" +
              (first_problem.empty() ? "" : " (" + first_problem + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli = RESIL_CLI_PATH;
  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else {
      selected.push_back(arg);
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1", oracle_equivalence},      {"2", bias_independent},       {"3a", influence_soundness},
      {"3b", influence_exact_at_u1},  {"4", janson_sandwich},        {"5", bonferroni_bracketing},
      {"6", design_properties},       {"7", sampler_properties},     {"8", balanced_composition},
      {"9", expander_certification},  {"10", [&cli] { return cli_replay(cli); }},
  };
  int failed = 0, ran = 0;
  for (const auto& [id, check] : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) continue;
    ++ran;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
    failed += !o.pass;
  }
  if (ran == 0) {
    std::cerr << "no criterion matched\n";
    return 1;
  }
  return failed == 0 ? 0 : 1;
}
