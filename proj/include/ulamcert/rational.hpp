#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace ulamcert {

/// Exact rational used for everything the user supplies as `p/q` (branch
/// endpoints, LY constants, ell, delta, hole endpoints). Arithmetic on the
/// hot paths is double precision; rationals are converted once.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Accepts `p/q`, integers, decimals (`0.0002`) and scientific notation
/// (`2e-4`). Decimals are converted exactly, so `0.1` becomes 1/10.
Rational parse_rational(std::string_view text);

/// `p/q`, or `p` when the denominator is one.
std::string format_rational(const Rational& value);

double to_double(const Rational& value);

Rational floor(const Rational& value);
Rational ceil(const Rational& value);

/// Returns true and stores the integer when `value` is integral and fits.
bool to_int64(const Rational& value, std::int64_t& out);

}  // namespace ulamcert
