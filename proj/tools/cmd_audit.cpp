#include <algorithm>
#include <cmath>

#include "cli.hpp"
#include "resil/analysis.hpp"
#include "resil/circuit.hpp"
#include "resil/galois.hpp"

namespace resil::cli {

namespace {

struct AuditArgs {
  std::string gen_path;
  std::string sigma;
  // design
  bool sampled = false;
  double delta = 0.01;
  std::optional<unsigned> min_d;
  // sampler
  double alpha = 2.0, beta = 1.0, k_constant = 16.0;
  std::uint64_t trials = 1000;
  std::optional<double> mu_cap;
  // delta / janson
  std::vector<std::uint64_t> rows;
  std::optional<double> max_delta;
  // sandwich
  unsigned k = 3;
};

Rational sigma_for(const AuditArgs& a, const generator::Generator& g) {
  return a.sigma.empty() ? g.params().sigma : parse_sigma(a.sigma);
}

// The rows T as their own table generator, so only |T| rows are expanded.
struct RowSelection {
  std::vector<std::uint64_t> rows;
  std::shared_ptr<const circuit::ResilientCircuit> circuit;
};

RowSelection select_rows(const AuditArgs& a, const generator::Generator& g) {
  const auto& p = g.params();
  RowSelection s;
  if (a.rows.empty()) {
    if (p.u > 64) throw InputError("generator has " + index_to_string(p.u) + " rows; choose a subset with --rows");
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(p.u); ++i) s.rows.push_back(i);
  } else {
    s.rows = a.rows;
    std::sort(s.rows.begin(), s.rows.end());
    if (std::adjacent_find(s.rows.begin(), s.rows.end()) != s.rows.end()) throw InputError("--rows has duplicates");
  }
  std::vector<std::uint32_t> table;
  for (auto i : s.rows) {
    const auto r = g.row(i);
    table.insert(table.end(), r.begin(), r.end());
  }
  generator::Params sub = p;
  sub.u = s.rows.size();
  s.circuit = circuit::build_circuit(generator::Generator::from_table(sub, std::move(table)));
  return s;
}

Json audit_config(const AuditArgs& a) {
  return Json{{"gen", a.gen_path},
              {"sigma", a.sigma.empty() ? Json(nullptr) : Json(a.sigma)},
              {"sampled", a.sampled},
              {"delta", a.delta},
              {"min_d", a.min_d ? Json(*a.min_d) : Json(nullptr)},
              {"alpha", a.alpha},
              {"beta", a.beta},
              {"k_constant", a.k_constant},
              {"trials", a.trials},
              {"mu_cap", a.mu_cap ? Json(*a.mu_cap) : Json(nullptr)},
              {"rows", a.rows},
              {"max_delta", a.max_delta ? Json(*a.max_delta) : Json(nullptr)},
              {"k", a.k}};
}

int run_design(const Globals& globals, const AuditArgs& a) {
  const auto g = load_generator(a.gen_path);
  report::Report r;
  r.operation = "audit.design";
  r.params = params_json(g.params());
  r.config = audit_config(a);
  generator::DesignOptions options;
  options.pair_cap = globals.budgets.pair_cap;
  options.allow_sampling = a.sampled;
  options.samples = globals.budgets.samples;
  options.delta = a.delta;
  options.seed = globals.seed;
  options.threads = globals.threads;
  options.enumeration_cap = globals.budgets.enum_cap;
  r.budget = Json{{"pair_cap", options.pair_cap}, {"samples", options.samples}, {"enum_cap", options.enumeration_cap}};
  const auto d = generator::check_design(g, options);
  r.point = d.d;
  r.details = Json{{"backend", g.kind_name()},
                   {"d", d.d},
                   {"max_intersection", d.max_intersection},
                   {"exact", d.exact},
                   {"pairs_checked", d.pairs_checked}};
  if (d.witness) {
    r.details["witness"] = Json{{"row_a", index_to_string(d.witness->row_a)},
                                {"row_b", index_to_string(d.witness->row_b)},
                                {"shift", d.witness->shift}};
  }
  if (!d.exact) {
    r.seed = globals.seed;
    r.truncation = Json{{"mode", "sampled"},
                        {"delta", report::number(d.delta)},
                        {"unseen_fraction_bound", report::number(d.unseen_fraction_bound)}};
  }
  std::optional<unsigned> expected = a.min_d;
  if (const auto* code = g.rs_code(); code != nullptr && g.kind() == generator::Generator::Kind::kReedSolomon) {
    r.details["expected_design"] = g.params().w - code->ell();
    if (!expected) expected = g.params().w - code->ell();
  }
  if (const auto* plan = g.plan(); plan != nullptr && plan->w2 > plan->c1) {
    r.details["expected_design"] = plan->w2 - plan->c1;
    if (!expected) expected = plan->w2 - plan->c1;
  }
  if (expected) {
    r.lower = *expected;
    r.violation = d.d < *expected;
  }
  return emit(globals.out, r);
}

int run_sampler(const Globals& globals, const AuditArgs& a) {
  const auto g = load_generator(a.gen_path);
  report::Report r;
  r.operation = "audit.sampler";
  r.params = params_json(g.params());
  r.config = audit_config(a);
  r.seed = globals.seed;
  generator::SamplerOptions options;
  options.alpha = a.alpha;
  options.beta = a.beta;
  options.trials = a.trials;
  options.mu_cap = a.mu_cap;
  options.seed = globals.seed;
  options.k_constant = a.k_constant;
  options.threads = globals.threads;
  options.enumeration_cap = globals.budgets.enum_cap;
  r.budget = Json{{"enum_cap", options.enumeration_cap}};
  const auto s = generator::check_sampler(g, options);
  r.point = s.worst_ratio;
  r.upper = s.k_constant * s.beta;
  r.violation = !s.passes();
  auto test_json = [](const generator::SamplerTestResult& t) {
    return Json{{"trial", t.trial},
                {"family", generator::to_string(t.family)},
                {"support", t.support},
                {"mu", report::number(t.mu)},
                {"moment", report::number(t.moment)},
                {"ratio", report::number(t.ratio)}};
  };
  r.details = Json{{"backend", g.kind_name()},
                   {"method", s.method},
                   {"mu_cap", report::number(s.mu_cap)},
                   {"worst_ratio", report::number(s.worst_ratio)},
                   {"worst", test_json(s.worst)},
                   {"violations", s.violations.size()}};
  return emit(globals.out, r);
}

int run_delta(const Globals& globals, const AuditArgs& a) {
  const auto g = load_generator(a.gen_path);
  const Rational sigma = sigma_for(a, g);
  const auto sel = select_rows(a, g);
  std::vector<std::uint64_t> local(sel.rows.size());
  for (std::size_t t = 0; t < local.size(); ++t) local[t] = t;
  const auto d = analysis::compute_delta(*sel.circuit, local, sigma, globals.budgets.pair_cap);
  report::Report r;
  r.operation = "audit.delta";
  r.params = params_json(g.params());
  r.params["sigma"] = to_string(sigma);
  r.config = audit_config(a);
  r.budget = Json{{"pair_cap", globals.budgets.pair_cap}};
  r.point = to_double(d.delta);
  const double max_l = d.term_l.empty() ? 0.0 : *std::max_element(d.term_l.begin(), d.term_l.end());
  r.details = Json{{"rows", sel.rows},
                   {"delta", report::rational(d.delta)},
                   {"overlap_pairs", d.overlap_pairs},
                   {"max_term_l", report::number(max_l)},
                   {"pairs_examined", d.pairs_examined}};
  if (a.max_delta) {
    r.upper = *a.max_delta;
    r.violation = to_double(d.delta) > *a.max_delta;
  }
  return emit(globals.out, r);
}

int run_janson(const Globals& globals, const AuditArgs& a) {
  const auto g = load_generator(a.gen_path);
  const Rational sigma = sigma_for(a, g);
  const auto& p = g.params();
  const auto sel = select_rows(a, g);
  std::vector<std::uint64_t> local(sel.rows.size());
  for (std::size_t t = 0; t < local.size(); ++t) local[t] = t;
  const auto d = analysis::compute_delta(*sel.circuit, local, sigma, globals.budgets.pair_cap);
  // Every subcircuit is a read-once OR of v ANDs of width w.
  const Rational zero = pow(1 - pow(sigma, p.w), p.v);
  const std::vector<Rational> zeros(sel.rows.size(), zero);
  const auto j = analysis::janson_bounds(zeros, d.delta);
  report::Report r;
  r.operation = "audit.janson";
  r.params = params_json(p);
  r.params["sigma"] = to_string(sigma);
  r.config = audit_config(a);
  r.budget = Json{{"pair_cap", globals.budgets.pair_cap}, {"exact_bits", globals.budgets.exact_bits}};
  r.lower = j.lower;
  r.upper = j.upper;
  r.truncation = Json{{"ell_used", j.ell_used},
                      {"ell_range", j.ell_range},
                      {"relative_cutoff", analysis::kJansonRelativeTruncation},
                      {"tail_bound", report::number(j.tail_bound)}};
  r.details = Json{{"rows", sel.rows},
                   {"p", report::rational(zero)},
                   {"product_lower", report::rational(j.product_lower)},
                   {"delta", report::rational(d.delta)},
                   {"lower", report::number(j.lower)},
                   {"upper", report::number(j.upper)}};
  if (p.n() <= globals.budgets.exact_bits) {
    const Rational exact = analysis::zero_probability(*sel.circuit, local, sigma, globals.threads);
    r.point = to_double(exact);
    r.details["exact"] = report::rational(exact);
    r.violation = to_double(exact) < j.lower || to_double(exact) > j.upper;
  }
  return emit(globals.out, r);
}

int run_sandwich(const Globals& globals, const AuditArgs& a) {
  const auto g = load_generator(a.gen_path);
  const Rational sigma = sigma_for(a, g);
  analysis::SandwichOptions options;
  options.exact_bits = globals.budgets.exact_bits;
  options.subset_cap = globals.budgets.subset_cap;
  options.threads = globals.threads;
  const auto s = analysis::sandwich_bias(g, sigma, a.k, options);
  report::Report r;
  r.operation = "audit.bias-sandwich";
  r.params = params_json(g.params());
  r.params["sigma"] = to_string(sigma);
  r.config = audit_config(a);
  r.budget = Json{{"exact_bits", options.exact_bits}, {"subset_cap", options.subset_cap}};
  r.point = to_double(s.bias);
  r.lower = s.ec_lower;
  r.upper = s.ec_upper;
  Json levels = Json::array();
  for (const auto& level : s.levels) {
    levels.push_back(Json{{"k", level.k},
                          {"reference", report::rational(level.reference)},
                          {"exact", level.exact ? report::rational(*level.exact) : Json(nullptr)},
                          {"janson_lower", report::rational(level.janson_lower)},
                          {"janson_upper", report::number(level.janson_upper)},
                          {"deviation", report::number(level.deviation)},
                          {"subsets", level.subsets}});
  }
  r.details = Json{{"k", s.k},
                   {"p", report::rational(s.p)},
                   {"bias", report::rational(s.bias)},
                   {"levels", levels},
                   {"deviation_bound", report::number(s.deviation_bound)},
                   {"exact_ec", s.exact_ec ? report::rational(*s.exact_ec) : Json(nullptr)}};
  if (s.exact_ec) {
    const double ec = to_double(*s.exact_ec);
    r.violation = ec < s.ec_lower || ec > s.ec_upper;
  }
  return emit(globals.out, r);
}

}  // namespace

void add_audit(CLI::App& app, Globals& globals, Action& action) {
  auto args = std::make_shared<AuditArgs>();
  auto* audit = app.add_subcommand("audit", "Check a generator file and print a JSON report");
  audit->require_subcommand(1);
  auto common = [args](CLI::App* sub) {
    sub->add_option("--gen", args->gen_path, "RESGEN file")->required();
  };
  auto with_sigma = [args](CLI::App* sub) {
    sub->add_option("--sigma", args->sigma, "Bias p/q (default: the generator's)");
  };
  auto with_rows = [args](CLI::App* sub) {
    sub->add_option("--rows", args->rows, "Row subset T, comma separated (default: all rows when u <= 64)")
        ->delimiter(',');
  };

  auto* design = audit->add_subcommand("design", "Largest d such that G is a d-design");
  common(design);
  design->add_flag("--sampled", args->sampled, "Sample row pairs when the pair budget is exceeded");
  design->add_option("--delta", args->delta, "Failure probability of the sampled bound")->capture_default_str();
  design->add_option("--min-d", args->min_d, "Report a violation below this d");
  design->callback([&, args] { action = [&, args] { return run_design(globals, *args); }; });

  auto* sampler = audit->add_subcommand("sampler", "Structured sampler tests E[alpha^F 1{F != 0}] <= K beta alpha mu");
  common(sampler);
  sampler->add_option("--alpha", args->alpha)->capture_default_str();
  sampler->add_option("--beta", args->beta)->capture_default_str();
  sampler->add_option("--trials", args->trials)->capture_default_str();
  sampler->add_option("--mu-cap", args->mu_cap, "Largest test mean (default 1/alpha)");
  sampler->add_option("--k-constant", args->k_constant)->capture_default_str();
  sampler->callback([&, args] { action = [&, args] { return run_sampler(globals, *args); }; });

  auto* delta = audit->add_subcommand("delta", "Dependency sum Delta of the subcircuits in T");
  common(delta);
  with_sigma(delta);
  with_rows(delta);
  delta->add_option("--max-delta", args->max_delta, "Report a violation above this value");
  delta->callback([&, args] { action = [&, args] { return run_delta(globals, *args); }; });

  auto* janson = audit->add_subcommand("janson", "Janson bracket on P[C_G(T) = 0]");
  common(janson);
  with_sigma(janson);
  with_rows(janson);
  janson->callback([&, args] { action = [&, args] { return run_janson(globals, *args); }; });

  auto* sandwich = audit->add_subcommand("bias-sandwich", "Bonferroni + Janson bracket on E[C_G] against the bias formula");
  common(sandwich);
  with_sigma(sandwich);
  sandwich->add_option("--k", args->k, "Odd truncation level K")->capture_default_str();
  sandwich->callback([&, args] { action = [&, args] { return run_sandwich(globals, *args); }; });
}

}  // namespace resil::cli
