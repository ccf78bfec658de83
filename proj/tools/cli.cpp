#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <regex>

namespace resil::cli {

namespace {

template <class T>
void from_env(const char* name, T& target) {
  const char* raw = std::getenv(name);
  if (raw == nullptr || *raw == '\0') return;
  const std::string text(raw);
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw InputError(std::string(name) + " must be a non-negative integer, got '" + text + "'");
  target = static_cast<T>(value);
}

}  // namespace

void Budgets::load_env() {
  from_env("RESIL_PAIR_CAP", pair_cap);
  from_env("RESIL_ENUM_CAP", enum_cap);
  from_env("RESIL_EXACT_BITS", exact_bits);
  from_env("RESIL_SAMPLES", samples);
  from_env("RESIL_SUBSET_CAP", subset_cap);
}

Json Budgets::to_json() const {
  return Json{{"pair_cap", pair_cap},
              {"enum_cap", enum_cap},
              {"exact_bits", exact_bits},
              {"samples", samples},
              {"subset_cap", subset_cap}};
}

Rational parse_sigma(const std::string& text) {
  static const std::regex form("[0-9]+/[0-9]+");
  if (!std::regex_match(text, form)) throw InputError("sigma must be written as p/q, got '" + text + "'");
  const Rational sigma = parse_rational(text);
  if (!(sigma > 0 && sigma <= Rational(1, 2))) throw InputError("sigma must lie in (0, 1/2]");
  return sigma;
}

generator::Generator load_generator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open generator file '" + path + "'");
  return generator::deserialize(in);
}

Json params_json(const generator::Params& p) {
  return Json{{"u", index_to_string(p.u)},
              {"v", p.v},
              {"w", p.w},
              {"sigma", to_string(p.sigma)},
              {"n", index_to_string(p.u == 0 ? 0 : Index{p.v} * p.w)}};
}

int emit(const std::string& out, const report::Report& r) {
  const std::string text = r.dump();
  if (out.empty() || out == "-") {
    std::cout << text << std::flush;
  } else {
    std::ofstream file(out, std::ios::binary);
    if (!file) throw InputError("cannot write '" + out + "'");
    file << text;
  }
  return r.violation ? 2 : 0;
}

}  // namespace resil::cli

int main(int argc, char** argv) {
  using namespace resil::cli;
  Globals globals;
  try {
    globals.budgets.load_env();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{"Resilient AND-OR-AND circuits: build generators, audit them, attack them, balance them."};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(
      "Exit status: 0 pass, 2 threshold violation (report still written), 1 error (no report).\n"
      "Budget defaults can be overridden by environment variables (flags win):\n"
      "  RESIL_PAIR_CAP    row pairs checked exactly by audit design (default 50000000)\n"
      "  RESIL_ENUM_CAP    generator rows enumerated by audits (default 10000000)\n"
      "  RESIL_EXACT_BITS  free bits enumerated for exact bias/influence (default 24)\n"
      "  RESIL_SAMPLES     Monte-Carlo samples (default 1000000)\n"
      "  RESIL_SUBSET_CAP  row subsets examined by audit bias-sandwich (default 200000)");
  app.add_option("--threads", globals.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1U, 256U));
  app.add_option("--seed", globals.seed, "Master seed for every stochastic step");
  app.add_option("--out", globals.out, "Output path (generator file for gen, report otherwise; default stdout)");
  app.add_option("--pair-cap", globals.budgets.pair_cap, "Override RESIL_PAIR_CAP");
  app.add_option("--enum-cap", globals.budgets.enum_cap, "Override RESIL_ENUM_CAP");
  app.add_option("--exact-bits", globals.budgets.exact_bits, "Override RESIL_EXACT_BITS")->check(CLI::Range(0U, 40U));
  app.add_option("--samples", globals.budgets.samples, "Override RESIL_SAMPLES");
  app.add_option("--subset-cap", globals.budgets.subset_cap, "Override RESIL_SUBSET_CAP");

  Action action;
  add_gen(app, globals, action);
  add_audit(app, globals, action);
  add_attack(app, globals, action);
  add_balance(app, globals, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return action ? action() : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
