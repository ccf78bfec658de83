#include <algorithm>
#include <numeric>

#include "cli.hpp"
#include "resil/analysis.hpp"
#include "resil/circuit.hpp"
#include "resil/rng.hpp"

namespace resil::cli {

namespace {

struct AttackArgs {
  std::string gen_path;
  std::string baseline;
  std::vector<std::uint64_t> q{1};
  std::string strategy = "prefix";
  std::string sigma;
  std::string mode = "auto";
};

// Coalitions for increasing q are nested: each strategy fixes an order of
// the inputs and takes its first q entries.
std::vector<std::uint64_t> attack_order(const AttackArgs& a, const circuit::BooleanFunction& f, std::uint64_t seed,
                                        std::uint64_t q_max) {
  const std::uint64_t n = f.num_inputs();
  if (a.strategy == "prefix") {
    std::vector<std::uint64_t> order(q_max);
    std::iota(order.begin(), order.end(), 0);
    return order;
  }
  if (a.strategy == "random") {
    std::vector<std::uint64_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    RandomStream rng(seed, 0);
    for (std::uint64_t t = 0; t < q_max; ++t) std::swap(all[t], all[t + rng.below(n - t)]);
    all.resize(q_max);
    return all;
  }
  if (a.strategy == "per-column") {
    const auto* c = dynamic_cast<const circuit::ResilientCircuit*>(&f);
    if (c == nullptr) throw InputError("per-column coalitions need a circuit with a v x w input layout");
    const auto v = c->params().v, w = c->params().w;
    std::vector<std::uint64_t> order(q_max);
    for (std::uint64_t t = 0; t < q_max; ++t) order[t] = generator::cell_index(v, t % w, static_cast<std::uint32_t>(t / w));
    return order;
  }
  throw InputError("unknown strategy '" + a.strategy + "' (expected prefix, random or per-column)");
}

int run_attack(const Globals& globals, const AttackArgs& a) {
  report::Report r;
  r.operation = "attack";
  circuit::FunctionPtr f;
  Rational sigma(1, 2);
  if (!a.gen_path.empty()) {
    const auto g = load_generator(a.gen_path);
    sigma = g.params().sigma;
    f = circuit::build_circuit(g);
    r.params = params_json(g.params());
  } else {
    f = circuit::make_baseline(a.baseline);
    r.params = Json{{"baseline", a.baseline}, {"n", f->num_inputs()}};
  }
  if (!a.sigma.empty()) sigma = parse_sigma(a.sigma);
  r.params["sigma"] = to_string(sigma);
  r.params["function"] = f->name();
  if (a.mode != "auto" && a.mode != "exact" && a.mode != "mc") {
    throw InputError("unknown mode '" + a.mode + "' (expected auto, exact or mc)");
  }
  if (a.q.empty()) throw InputError("--q needs at least one coalition size");
  const std::uint64_t n = f->num_inputs();
  const std::uint64_t q_max = *std::max_element(a.q.begin(), a.q.end());
  if (q_max > n) throw InputError("coalition size " + std::to_string(q_max) + " exceeds n = " + std::to_string(n));
  const auto order = attack_order(a, *f, globals.seed, q_max);
  const auto* c = dynamic_cast<const circuit::ResilientCircuit*>(f.get());

  r.seed = globals.seed;
  r.budget = Json{{"exact_bits", globals.budgets.exact_bits}, {"samples", globals.budgets.samples}};
  r.config = Json{{"gen", a.gen_path.empty() ? Json(nullptr) : Json(a.gen_path)},
                  {"baseline", a.baseline.empty() ? Json(nullptr) : Json(a.baseline)},
                  {"q", a.q},
                  {"strategy", a.strategy},
                  {"sigma", a.sigma.empty() ? Json(nullptr) : Json(a.sigma)},
                  {"mode", a.mode}};
  Json rows = Json::array();
  double previous = -1.0;
  bool monotone = true;
  for (const auto q : a.q) {
    const circuit::Coalition coalition(n, std::vector<std::uint64_t>(order.begin(), order.begin() + q));
    const bool exact = a.mode == "exact" || (a.mode == "auto" && n - q <= globals.budgets.exact_bits);
    const auto e = exact ? analysis::influence_exact(*f, coalition, sigma, globals.budgets.exact_bits, globals.threads)
                         : analysis::influence_mc(*f, coalition, sigma, globals.budgets.samples,
                                                  substream_seed(globals.seed, q), globals.threads);
    Json row{{"q", q},
             {"mode", analysis::to_string(e.mode)},
             {"point", report::number(e.point)},
             {"stderr", report::number(e.std_error)},
             {"samples", e.samples},
             {"exact", e.exact ? Json(to_string(*e.exact)) : Json(nullptr)},
             {"ratio", q == 0 ? Json(nullptr) : report::number(e.point / static_cast<double>(q))}};
    if (c != nullptr) {
      const auto bound = analysis::influence_analytic_bound(*c, coalition, sigma);
      row["analytic_upper"] = report::rational(*bound.exact);
      const double upper = to_double(*bound.exact);
      const bool sound = e.exact ? *e.exact <= *bound.exact : e.point <= upper + 4 * e.std_error;
      row["within_bound"] = sound;
      if (!sound) r.violation = true;
      if (q == a.q.back()) r.upper = upper;
    }
    if (e.point < previous) monotone = false;
    previous = e.point;
    if (q == a.q.back()) {
      r.point = e.point;
      r.std_error = e.std_error;
    }
    rows.push_back(row);
  }
  r.details = Json{{"coalition_order", std::vector<std::uint64_t>(order.begin(), order.end())},
                   {"rows", rows},
                   {"non_decreasing", monotone}};
  return emit(globals.out, r);
}

}  // namespace

void add_attack(CLI::App& app, Globals& globals, Action& action) {
  auto args = std::make_shared<AttackArgs>();
  auto* attack = app.add_subcommand("attack", "Influence of coalitions Q on a generator circuit or a baseline");
  auto* gen = attack->add_option("--gen", args->gen_path, "RESGEN file; attacks its circuit C_G");
  auto* base = attack->add_option("--baseline", args->baseline, "majority:n | tribes:v:w | recmaj3:d | or:t");
  gen->excludes(base);
  attack->add_option("--q", args->q, "Coalition sizes, comma separated")->delimiter(',')->capture_default_str();
  attack->add_option("--strategy", args->strategy, "prefix | random | per-column")->capture_default_str();
  attack->add_option("--sigma", args->sigma, "Bias p/q (default: the generator's, else 1/2)");
  attack->add_option("--mode", args->mode, "auto | exact | mc")->capture_default_str();
  attack->callback([&, args] {
    action = [&, args] {
      if (args->gen_path.empty() == args->baseline.empty()) throw InputError("attack needs exactly one of --gen, --baseline");
      return run_attack(globals, *args);
    };
  });
}

}  // namespace resil::cli
