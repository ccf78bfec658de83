#include "resil/numeric.hpp"

#include <algorithm>

#include "resil/errors.hpp"

namespace resil {

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  const std::string num(text.substr(0, slash));
  const std::string den = slash == std::string_view::npos ? "1" : std::string(text.substr(slash + 1));
  auto digits = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!digits(num) || !digits(den)) {
    throw InputError("expected a rational of the form p/q, got '" + std::string(text) + "'");
  }
  BigInt n(num), d(den);
  if (d == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
  Rational q(n, d);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::string index_to_string(Index value) {
  if (value == 0) return "0";
  std::string out;
  while (value > 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

Index parse_index(std::string_view text) {
  if (text.empty()) throw InputError("empty integer");
  Index value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw InputError("invalid integer '" + std::string(text) + "'");
    Index next = 0;
    if (!checked_mul(value, 10, next) || next > kIndexMax - static_cast<Index>(c - '0')) {
      throw InputError("integer out of range '" + std::string(text) + "'");
    }
    value = next + static_cast<Index>(c - '0');
  }
  return value;
}

BigInt to_bigint(Index value) { return BigInt(index_to_string(value)); }

Rational pow(const Rational& base, unsigned long exponent) {
  Rational out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
  // Powers of a reduced fraction stay reduced.
  return out;
}

double to_double(const Rational& q) { return q.get_d(); }

bool checked_mul(Index a, Index b, Index& out) {
  if (a != 0 && b > kIndexMax / a) return false;
  out = a * b;
  return true;
}

bool checked_pow(Index base, unsigned exponent, Index& out) {
  Index acc = 1;
  for (unsigned i = 0; i < exponent; ++i) {
    if (!checked_mul(acc, base, acc)) return false;
  }
  out = acc;
  return true;
}

}  // namespace resil
