#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "resil/numeric.hpp"

namespace resil::report {

using Json = nlohmann::ordered_json;

inline constexpr int kReportVersion = 1;

// Versioned machine-readable result. Field order is fixed and nothing
// run-dependent (time, host, worker count) is recorded, so equal configs
// give byte-identical documents.
struct Report {
  std::string operation;
  Json params = Json::object();
  std::optional<double> point;
  std::optional<double> std_error;
  std::optional<double> lower;
  std::optional<double> upper;
  Json budget = Json::object();
  std::optional<std::uint64_t> seed;
  Json truncation = nullptr;
  Json details = Json::object();
  Json config = Json::object();
  bool violation = false;

  Json to_json() const;
  std::string dump() const;
};

// {"exact": "p/q", "value": double}
Json rational(const Rational& q);
// Non-finite doubles become null.
Json number(double x);

}  // namespace resil::report
