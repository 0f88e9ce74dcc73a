#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace spdemil {

/// Arbitrary-precision rational used for regularity exponents and all
/// planning arithmetic.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "a/b", "a", or a decimal literal such as "0.875" into an exact
/// rational. Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);

/// Renders as "a/b", or "a" when the denominator is one.
std::string to_string(const Rational& value);

double to_double(const Rational& value);

Rational make_rational(std::int64_t num, std::int64_t den = 1);

/// Smallest integer c >= 1 with c >= base^exponent, computed exactly.
/// Negative exponents yield 1 for base >= 1.
std::uint64_t ceil_power(std::uint64_t base, const Rational& exponent);

}  // namespace spdemil
