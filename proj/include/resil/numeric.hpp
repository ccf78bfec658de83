#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace resil {

using Rational = mpq_class;
using BigInt = mpz_class;

// Generator index spaces (v * d^(w1-1) for walks) outgrow 64 bits quickly.
using Index = unsigned __int128;

Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
std::string index_to_string(Index value);
Index parse_index(std::string_view text);
BigInt to_bigint(Index value);

Rational pow(const Rational& base, unsigned long exponent);
double to_double(const Rational& q);

// Overflow-checked arithmetic; false on overflow, out untouched.
bool checked_mul(Index a, Index b, Index& out);
bool checked_pow(Index base, unsigned exponent, Index& out);

inline constexpr Index kIndexMax = ~Index{0};

}  // namespace resil
