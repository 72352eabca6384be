#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace lodeq {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

double to_double(const Rational& q);
std::string to_string(const Rational& q);

bool is_integer(const Rational& q);

// Closest rational with a small denominator if the double is one, else the exact dyadic value.
Rational nice_rational(double x);

// q^n for integer n (q != 0 when n < 0).
Rational rational_pow(const Rational& q, long n);

// Exact k-th root of q if it is rational.
bool exact_root(const Rational& q, long k, Rational& out);

} // namespace lodeq
