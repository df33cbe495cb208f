#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>
#include <string_view>

namespace nodice {

/// Exact rational numbers (GMP-backed). Flip biases and every oracle
/// quantity are kept in this type.
using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

/// Parses "3/10", "0.3", "1", ".5" into an exact rational. Throws
/// std::invalid_argument on malformed text.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" (or "p" when q == 1).
std::string rational_to_string(const Rational& r);

/// Short decimal rendering when the rational has a terminating expansion of
/// at most 12 digits, otherwise "p/q".
std::string rational_to_literal(const Rational& r);

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace nodice
