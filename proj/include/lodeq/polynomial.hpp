#pragma once

#include "lodeq/expr.hpp"

#include <optional>
#include <vector>

namespace lodeq {

// Dense polynomial over Q, coefficients in ascending degree; no trailing zeros.
using Poly = std::vector<Rational>;

void trim(Poly& p);
int degree(const Poly& p);
Poly poly_add(const Poly& a, const Poly& b);
Poly poly_sub(const Poly& a, const Poly& b);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, const Rational& c);
// a = q*b + r with deg r < deg b.
void poly_divmod(const Poly& a, const Poly& b, Poly& q, Poly& r);
// Monic greatest common divisor.
Poly poly_gcd(Poly a, Poly b);
Poly poly_derivative(const Poly& p);
Rational poly_eval(const Poly& p, const Rational& x);
Poly poly_monic(const Poly& p);

struct RationalFunction {
    Poly num;
    Poly den;
};

std::optional<Poly> as_polynomial(const Expression& e);
// Reduced num/den with monic denominator.
std::optional<RationalFunction> as_rational_function(const Expression& e);

Expression to_expression(const Poly& p);
Expression to_expression(const RationalFunction& f);

} // namespace lodeq
