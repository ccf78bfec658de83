#include "resil/report.hpp"

#include <cmath>

namespace resil::report {

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json rational(const Rational& q) {
  Json out = Json::object();
  out["exact"] = to_string(q);
  out["value"] = number(to_double(q));
  return out;
}

namespace {

template <class T>
Json optional_number(const std::optional<T>& x) {
  if (!x) return nullptr;
  if constexpr (std::is_floating_point_v<T>) {
    return number(*x);
  } else {
    return *x;
  }
}

}  // namespace

Json Report::to_json() const {
  Json out = Json::object();
  out["report_version"] = kReportVersion;
  out["operation"] = operation;
  out["status"] = violation ? "violation" : "pass";
  out["params"] = params;
  out["point"] = optional_number(point);
  out["stderr"] = optional_number(std_error);
  out["bounds"] = Json{{"lower", optional_number(lower)}, {"upper", optional_number(upper)}};
  out["budget"] = budget;
  out["seed"] = optional_number(seed);
  out["truncation"] = truncation;
  out["details"] = details;
  out["config"] = config;
  return out;
}

std::string Report::dump() const { return to_json().dump(2) + "\n"; }

}  // namespace resil::report
