#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "CLI11.hpp"
#include "resil/errors.hpp"
#include "resil/generator.hpp"
#include "resil/report.hpp"

namespace resil::cli {

using report::Json;

// Default budgets; each can be overridden by an environment variable and
// then by the matching flag.
struct Budgets {
  std::uint64_t pair_cap = 50'000'000;   // RESIL_PAIR_CAP
  std::uint64_t enum_cap = 10'000'000;   // RESIL_ENUM_CAP
  unsigned exact_bits = 24;              // RESIL_EXACT_BITS
  std::uint64_t samples = 1'000'000;     // RESIL_SAMPLES
  std::uint64_t subset_cap = 200'000;    // RESIL_SUBSET_CAP

  void load_env();
  Json to_json() const;
};

struct Globals {
  unsigned threads = 1;
  std::uint64_t seed = 1;
  std::string out;
  Budgets budgets;
};

using Action = std::function<int()>;

// Accepts only "p/q".
Rational parse_sigma(const std::string& text);
generator::Generator load_generator(const std::string& path);
Json params_json(const generator::Params& p);

// Writes the report to --out (or stdout); returns 2 on a violation, else 0.
int emit(const std::string& out, const report::Report& r);

void add_gen(CLI::App& app, Globals& globals, Action& action);
void add_audit(CLI::App& app, Globals& globals, Action& action);
void add_attack(CLI::App& app, Globals& globals, Action& action);
void add_balance(CLI::App& app, Globals& globals, Action& action);

}  // namespace resil::cli
