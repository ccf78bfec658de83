#include <numeric>

#include "cli.hpp"
#include "resil/balance.hpp"
#include "resil/circuit.hpp"

namespace resil::cli {

namespace {

struct BalanceArgs {
  std::uint64_t n = 0;
  std::string c1, c2;
  std::string mode = "paper";
  std::string second = "tribes";
};

Json singleton_json(const balance::SingletonReport& s) {
  return Json{{"worst", report::rational(s.worst)},
              {"worst_position", s.worst_position},
              {"worst_lemma_bound", report::rational(s.worst_lemma_bound)}};
}

Json record_json(const balance::KklRecord& k) {
  return Json{{"n_target", k.n_target},
              {"w", k.w},
              {"v", k.v},
              {"n", k.n},
              {"c1", report::number(k.c1)},
              {"second", balance::to_string(k.second)},
              {"w2", k.w2},
              {"v2", k.v2},
              {"log_argument", report::number(k.log_argument)},
              {"total_bits", k.total_bits},
              {"influence_c1", report::rational(k.influence_c1)},
              {"influence_c2", report::rational(k.influence_c2)},
              {"kkl_constant", report::number(k.kkl_constant)}};
}

Json composite_json(const balance::BalancedComposite& b) {
  return Json{{"e1", report::rational(b.e1)},
              {"e2", report::rational(b.e2)},
              {"delta", report::rational(b.delta)},
              {"mu", report::rational(b.mu)},
              {"target", report::rational(b.target)},
              {"dnf_mean", report::rational(b.dnf_mean)},
              {"mean", report::rational(b.mean)},
              {"residual", report::rational(b.residual)}};
}

int run_balance(const Globals& globals, const BalanceArgs& a) {
  report::Report r;
  r.operation = "balance";
  const auto mode = balance::parse_mode(a.mode);
  balance::BalancedComposite b;
  std::optional<balance::SingletonReport> singleton;
  if (a.n > 0) {
    if (!a.c1.empty() || !a.c2.empty()) throw InputError("balance takes either --n or --c1/--c2, not both");
    const auto second = balance::parse_second_kind(a.second);
    auto m = balance::build_kkl_matcher(a.n, balance::KklOptions{mode, second});
    r.details["kkl"] = record_json(m.record);
    singleton = m.record.singleton;
    b = std::move(m.composite);
  } else {
    if (a.c1.empty() || a.c2.empty()) throw InputError("balance needs --n, or both --c1 and --c2");
    b = balance::compose_balanced(circuit::make_baseline(a.c1), circuit::make_baseline(a.c2), mode,
                                  globals.budgets.exact_bits, globals.threads);
    singleton = balance::singleton_influences(b, globals.budgets.exact_bits);
  }
  const std::uint64_t dnf_bits = b.d->num_inputs();
  const std::uint64_t total = b.circuit->num_inputs();
  r.params = Json{{"n", a.n == 0 ? Json(nullptr) : Json(a.n)},
                  {"mode", balance::to_string(mode)},
                  {"c1", b.c1->name()},
                  {"c2", b.c2->name()},
                  {"total_bits", total}};
  r.point = to_double(b.mean);
  // Nearest rounding of k leaves |E[D] - target| <= 2^-(n+1), hence this cap.
  const Rational cap = b.mu / Rational(BigInt(1) << static_cast<mp_bitcnt_t>(dnf_bits));
  r.upper = to_double(Rational(1, 2) + cap);
  r.lower = to_double(Rational(1, 2) - cap);
  r.budget = Json{{"exact_bits", globals.budgets.exact_bits}};
  r.config = Json{{"n", a.n},
                  {"c1", a.c1.empty() ? Json(nullptr) : Json(a.c1)},
                  {"c2", a.c2.empty() ? Json(nullptr) : Json(a.c2)},
                  {"mode", a.mode},
                  {"second", a.second}};
  r.details["composite"] = composite_json(b);
  r.details["descriptor"] = Json{{"c1", b.c1->name()},
                                 {"c2", b.c2->name()},
                                 {"dnf", Json{{"n", dnf_bits}, {"k", b.d->numerator().get_str()}}}};
  r.details["singleton"] = singleton_json(*singleton);

  bool violation = b.residual > cap;
  if (mode == balance::Mode::kExactDyadic && b.residual != 0) violation = true;
  Json verification = nullptr;
  if (total <= std::min<unsigned>(globals.budgets.exact_bits, 20)) {
    // Brute force over all inputs of C', independent of the closed forms.
    const std::vector<std::uint64_t> base(total, 0);
    std::vector<std::uint64_t> free(total);
    std::iota(free.begin(), free.end(), 0);
    const auto& f = *b.circuit;
    const auto hist = circuit::popcount_histogram(
        base, free, [&f](std::span<const std::uint64_t> in) { return f.eval_words(in); }, globals.threads);
    const Rational brute = circuit::weigh_histogram(hist, Rational(1, 2));
    verification = Json{{"exhaustive_mean", report::rational(brute)}, {"matches", brute == b.mean}};
    if (brute != b.mean) violation = true;
  }
  r.details["verification"] = verification;
  r.violation = violation;
  return emit(globals.out, r);
}

}  // namespace

void add_balance(CLI::App& app, Globals& globals, Action& action) {
  auto args = std::make_shared<BalanceArgs>();
  auto* bal = app.add_subcommand("balance", "Rebalance a pair of circuits with a dyadic DNF to mean 1/2");
  bal->add_option("--n", args->n, "Target input count for the KKL-matching construction");
  bal->add_option("--c1", args->c1, "First circuit as a baseline spec (instead of --n)");
  bal->add_option("--c2", args->c2, "Second circuit as a baseline spec (instead of --n)");
  bal->add_option("--mode", args->mode, "paper | exact-dyadic")->capture_default_str();
  bal->add_option("--second", args->second, "tribes | or (second circuit of the --n construction)")
      ->capture_default_str();
  bal->callback([&, args] { action = [&, args] { return run_balance(globals, *args); }; });
}

}  // namespace resil::cli
