#include "lodeq/rational.hpp"

#include <cmath>
#include <limits>

namespace lodeq {

namespace {

const Integer kTwo53 = Integer(1) << 53;

bool fits53(const Integer& z) { return abs(z) <= kTwo53; }

} // namespace

double to_double(const Rational& q) {
    const Integer& n = numerator(q);
    const Integer& d = denominator(q);
    if (fits53(n) && fits53(d))
        return static_cast<double>(n) / static_cast<double>(d);
    return q.convert_to<double>();
}

std::string to_string(const Rational& q) {
    if (denominator(q) == 1)
        return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

bool is_integer(const Rational& q) { return denominator(q) == 1; }

Rational nice_rational(double x) {
    if (!std::isfinite(x))
        return Rational(0);
    for (long den = 1; den <= 1024; ++den) {
        double n = std::round(x * static_cast<double>(den));
        if (std::abs(n) > 1e15)
            break;
        if (n / static_cast<double>(den) == x)
            return Rational(Integer(static_cast<long long>(n)), Integer(den));
    }
    int exp = 0;
    double m = std::frexp(x, &exp);
    // m * 2^53 is an integer for any finite double.
    long long mi = static_cast<long long>(std::ldexp(m, 53));
    Rational r(mi);
    int shift = exp - 53;
    if (shift >= 0)
        r *= Rational(Integer(1) << shift);
    else
        r /= Rational(Integer(1) << (-shift));
    return r;
}

Rational rational_pow(const Rational& q, long n) {
    if (n < 0)
        return Rational(1) / rational_pow(q, -n);
    Rational result(1);
    Rational base = q;
    while (n > 0) {
        if (n & 1)
            result *= base;
        base *= base;
        n >>= 1;
    }
    return result;
}

namespace {

bool integer_root(const Integer& z, long k, Integer& out) {
    if (z < 0) {
        if (k % 2 == 0)
            return false;
        Integer r;
        if (!integer_root(-z, k, r))
            return false;
        out = -r;
        return true;
    }
    if (z < 2) {
        out = z;
        return true;
    }
    double guess = std::pow(z.convert_to<double>(), 1.0 / static_cast<double>(k));
    if (!std::isfinite(guess) || guess > 1e15)
        return false;
    Integer g(static_cast<long long>(std::llround(guess)));
    for (Integer c = (g > 1 ? g - 1 : Integer(0)); c <= g + 1; ++c) {
        Integer p = pow(c, static_cast<unsigned>(k));
        if (p == z) {
            out = c;
            return true;
        }
    }
    return false;
}

} // namespace

bool exact_root(const Rational& q, long k, Rational& out) {
    if (k <= 0)
        return false;
    Integer n, d;
    if (!integer_root(numerator(q), k, n) || !integer_root(denominator(q), k, d))
        return false;
    out = Rational(n, d);
    return true;
}

} // namespace lodeq
