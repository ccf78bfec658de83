#include <fstream>
#include <iostream>

#include "cli.hpp"
#include "resil/expander.hpp"

namespace resil::cli {

namespace {

struct GenArgs {
  std::uint32_t v = 0, w = 0;
  std::string u = "0";
  std::string sigma = "1/2";
  unsigned ell = 0, c1 = 0, d = 0;
  unsigned w1 = 0, w2 = 0, power = 0;
  std::optional<unsigned> explicit_w;
  std::optional<double> lambda;
  unsigned attempts = 50;
  std::uint64_t trials = 200;
  bool table = false;
  std::string report_path;
};

Json plan_json(const generator::ExplicitGeneratorPlan& p) {
  return Json{{"v", p.v},
              {"sigma", to_string(p.sigma)},
              {"w", p.w},
              {"w1", p.w1},
              {"w2", p.w2},
              {"c1", p.c1},
              {"lambda_target", report::number(p.lambda_target)},
              {"lambda_base", report::number(p.lambda_base)},
              {"lambda_estimated", report::number(p.lambda_estimated)},
              {"lambda_meets_target", p.lambda_meets_target()},
              {"power", p.power},
              {"degree", p.expander ? p.expander->degree() : 0},
              {"u", index_to_string(p.u)},
              {"ln_u", report::number(p.ln_u)},
              {"iterations", p.iterations},
              {"from_formula", p.from_formula}};
}

Json draft_json(const generator::PlanDraft& d) {
  Json out{{"v", d.v},
           {"sigma", to_string(d.sigma)},
           {"c1", d.c1},
           {"w", d.w},
           {"lambda_target", report::number(d.lambda_target)},
           {"lambda_base", d.lambda_base ? report::number(*d.lambda_base) : Json(nullptr)},
           {"power", d.power},
           {"degree", d.degree ? Json(*d.degree) : Json(nullptr)},
           {"lambda_estimated", d.lambda_estimated ? report::number(*d.lambda_estimated) : Json(nullptr)},
           {"ln_degree", report::number(d.ln_degree)},
           {"w1", d.w1},
           {"w2", d.w2},
           {"ln_u", report::number(d.ln_u)},
           {"u", d.u ? Json(index_to_string(*d.u)) : Json(nullptr)},
           {"iterations", d.iterations},
           {"converged", d.converged},
           {"violations", d.violations}};
  return out;
}

Json config_json(const GenArgs& a) {
  return Json{{"v", a.v},
              {"w", a.w},
              {"u", a.u},
              {"sigma", a.sigma},
              {"ell", a.ell},
              {"c1", a.c1},
              {"d", a.d},
              {"w1", a.w1},
              {"w2", a.w2},
              {"power", a.power},
              {"explicit_w", a.explicit_w ? Json(*a.explicit_w) : Json(nullptr)},
              {"lambda", a.lambda ? report::number(*a.lambda) : Json(nullptr)},
              {"attempts", a.attempts},
              {"trials", a.trials},
              {"table", a.table}};
}

int finish(const Globals& globals, const GenArgs& args, const generator::Generator& g, report::Report r) {
  if (globals.out.empty()) throw InputError("gen needs --out for the generator file");
  {
    std::ofstream file(globals.out, std::ios::binary);
    if (!file) throw InputError("cannot write '" + globals.out + "'");
    generator::serialize(g, file, args.table);
  }
  r.params = params_json(g.params());
  r.details["backend"] = g.kind_name();
  r.config = config_json(args);
  return emit(args.report_path, r);
}

generator::Params params_from(const GenArgs& a) {
  return generator::Params{parse_index(a.u), a.v, a.w, parse_sigma(a.sigma)};
}

}  // namespace

void add_gen(CLI::App& app, Globals& globals, Action& action) {
  auto args = std::make_shared<GenArgs>();
  auto* gen = app.add_subcommand("gen", "Build a generator G : [u] -> [v]^w and write it as a RESGEN file");
  gen->require_subcommand(1);
  auto common = [&, args](CLI::App* sub) {
    sub->add_option("--sigma", args->sigma, "Bias of each input bit, as p/q")->capture_default_str();
    sub->add_flag("--table", args->table, "Write the full row table even for procedural generators");
    sub->add_option("--report", args->report_path, "Report path (default stdout)");
  };

  auto* identity = gen->add_subcommand("build-identity", "All v^w rows");
  identity->add_option("--v", args->v)->required();
  identity->add_option("--w", args->w)->required();
  common(identity);
  identity->callback([&, args] {
    action = [&, args] {
      report::Report r;
      r.operation = "gen.build-identity";
      const auto g = generator::build_identity(args->v, args->w, parse_sigma(args->sigma), globals.budgets.enum_cap);
      return finish(globals, *args, g, r);
    };
  });

  auto* random = gen->add_subcommand("build-random", "u uniformly random rows");
  random->add_option("--v", args->v)->required();
  random->add_option("--w", args->w)->required();
  random->add_option("--u", args->u)->required();
  common(random);
  random->callback([&, args] {
    action = [&, args] {
      report::Report r;
      r.operation = "gen.build-random";
      r.seed = globals.seed;
      const auto g = generator::build_random(params_from(*args), globals.seed, globals.budgets.enum_cap);
      return finish(globals, *args, g, r);
    };
  });

  auto* walk = gen->add_subcommand("build-walk", "Walks on a power of the shift-inverse expander");
  walk->add_option("--v", args->v, "Prime vertex count")->required();
  walk->add_option("--w", args->w, "Walk length")->required();
  auto* power_opt = walk->add_option("--power", args->power, "Graph power k");
  walk->add_option("--lambda", args->lambda, "Smallest power whose estimated lambda is <= this")->excludes(power_opt);
  common(walk);
  walk->callback([&, args] {
    action = [&, args] {
      report::Report r;
      r.operation = "gen.build-walk";
      const auto base = expander::build_shift_inverse(args->v);
      std::shared_ptr<const expander::ExpanderGraph> graph;
      if (args->lambda) {
        auto powered = expander::power_to_target(base, *args->lambda);
        r.details["base_lambda"] = report::number(powered.base_lambda);
        graph = std::make_shared<const expander::ExpanderGraph>(std::move(powered.graph));
      } else {
        graph = std::make_shared<const expander::ExpanderGraph>(expander::power(base, std::max(1U, args->power)));
      }
      r.details["power"] = graph->exponent();
      r.details["degree"] = graph->degree();
      r.details["lambda_estimated"] = report::number(expander::estimate_lambda(*graph));
      const auto g = generator::build_walk(graph, args->w, parse_sigma(args->sigma));
      return finish(globals, *args, g, r);
    };
  });

  auto* rs = gen->add_subcommand("build-rs", "Reed-Solomon codewords of degree <= ell, u = v^ell");
  rs->add_option("--v", args->v, "Prime field size")->required();
  rs->add_option("--ell", args->ell)->required();
  rs->add_option("--w", args->w)->required();
  common(rs);
  rs->callback([&, args] {
    action = [&, args] {
      report::Report r;
      r.operation = "gen.build-rs";
      const auto g = generator::build_reed_solomon(args->v, args->ell, args->w, parse_sigma(args->sigma));
      r.details["expected_design"] = args->w - args->ell;
      return finish(globals, *args, g, r);
    };
  });

  auto* expl = gen->add_subcommand("build-explicit", "Expander walk followed by a Reed-Solomon pad");
  expl->add_option("--v", args->v, "Prime alphabet size")->required();
  expl->add_option("--c1", args->c1, "Design slack constant")->required();
  expl->add_option("--w", args->explicit_w, "Override the derived width");
  auto* w1_opt = expl->add_option("--w1", args->w1, "Walk length (desk-scale plan)");
  auto* w2_opt = expl->add_option("--w2", args->w2, "Reed-Solomon length (desk-scale plan)");
  auto* pow_opt = expl->add_option("--power", args->power, "Graph power (desk-scale plan)");
  w1_opt->needs(w2_opt)->needs(pow_opt);
  common(expl);
  expl->callback([&, args] {
    action = [&, args] {
      report::Report r;
      r.operation = "gen.build-explicit";
      const Rational sigma = parse_sigma(args->sigma);
      generator::ExplicitGeneratorPlan plan;
      if (args->w1 > 0) {
        plan = generator::make_plan(args->v, sigma, args->w1, args->w2, args->c1, args->power);
      } else {
        generator::PlanOptions options;
        options.w = args->explicit_w;
        const auto draft = generator::draft_explicit(args->v, sigma, args->c1, options);
        if (!draft.violations.empty()) {
          std::cerr << "plan: " << draft_json(draft).dump() << "\n";
        }
        plan = generator::plan_explicit(args->v, sigma, args->c1, options);
      }
      r.details["plan"] = plan_json(plan);
      const auto g = generator::build_explicit(plan);
      return finish(globals, *args, g, r);
    };
  });

  auto* search = gen->add_subcommand("search", "Random generators until one is a d-design and a sampler");
  search->add_option("--v", args->v)->required();
  search->add_option("--w", args->w)->required();
  search->add_option("--u", args->u)->required();
  search->add_option("--d", args->d, "Design target")->required();
  search->add_option("--attempts", args->attempts)->capture_default_str();
  search->add_option("--trials", args->trials, "Sampler tests per attempt")->capture_default_str();
  common(search);
  search->callback([&, args] {
    action = [&, args] {
      report::Report r;
      r.operation = "gen.search";
      r.seed = globals.seed;
      const auto params = params_from(*args);
      generator::SearchOptions options;
      options.max_attempts = args->attempts;
      options.sampler.trials = args->trials;
      options.sampler.threads = globals.threads;
      options.design.threads = globals.threads;
      options.design.pair_cap = globals.budgets.pair_cap;
      r.config = config_json(*args);
      r.budget = Json{{"pair_cap", globals.budgets.pair_cap}};
      auto describe = [&](const generator::SearchResult& s) {
        return Json{{"attempts", s.attempts},
                    {"attempt_seed", s.attempt_seed},
                    {"design_d", s.design.d},
                    {"max_intersection", s.design.max_intersection},
                    {"sampler_worst_ratio", report::number(s.sampler.worst_ratio)},
                    {"sampler_passes", s.sampler.passes()}};
      };
      try {
        const auto found = generator::search_random(params, args->d, globals.seed, options);
        r.details["search"] = describe(found);
        r.point = found.design.d;
        return finish(globals, *args, found.generator, r);
      } catch (const generator::SearchFailure& failure) {
        r.violation = true;
        r.params = params_json(params);
        r.details["failure"] = failure.what();
        r.details["certified"] = failure.certified();
        r.details["best"] = failure.best() ? describe(*failure.best()) : Json(nullptr);
        return emit(args->report_path, r);
      }
    };
  });
}

}  // namespace resil::cli
