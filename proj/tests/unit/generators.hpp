#pragma once

#include "lodeq/expr.hpp"
#include "lodeq/ode.hpp"
#include "lodeq/transform.hpp"

#include <cmath>
#include <random>

namespace lodeq::testing {

inline Rational small_rational(std::mt19937_64& rng, int range = 8, int den = 4) {
    std::uniform_int_distribution<int> n(-range, range);
    std::uniform_int_distribution<int> d(1, den);
    return Rational(n(rng), d(rng));
}

// Polynomial of degree <= deg with coefficients k/8 in [-2, 2].
inline Expression random_polynomial(std::mt19937_64& rng, int deg) {
    std::uniform_int_distribution<int> c(-16, 16);
    std::vector<Expression> terms;
    for (int i = 0; i <= deg; ++i)
        terms.push_back(Expression(Rational(c(rng), 8)) * pow(Expression::t(), i));
    return make_sum(std::move(terms));
}

// Random closed-form expression that is smooth and finite on [1, 2].
inline Expression random_expression(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
    const Expression t = Expression::t();
    switch (pick(rng)) {
    case 0:
        return Expression(small_rational(rng));
    case 1:
        return t;
    case 2:
        return random_expression(rng, depth - 1) + random_expression(rng, depth - 1);
    case 3:
        return random_expression(rng, depth - 1) * random_expression(rng, depth - 1);
    case 4:
        return pow(random_expression(rng, depth - 1), std::uniform_int_distribution<int>(2, 3)(rng));
    case 5:
        return sin(random_expression(rng, depth - 1));
    case 6:
        return exp(Rational(1, 4) * random_expression(rng, depth - 1));
    case 7:
        return atan(random_expression(rng, depth - 1));
    case 8:
        return Expression(1) / (Expression(2) + pow(random_expression(rng, depth - 1), 2));
    default:
        return log(Expression(1) + pow(random_expression(rng, depth - 1), 2));
    }
}

// Random homogeneous or inhomogeneous equation with polynomial data of degree <= deg.
inline LinearODE random_ode(std::mt19937_64& rng, int r, int deg, const Interval& I, bool homogeneous = true) {
    std::vector<Expression> a;
    for (int m = 0; m < r; ++m)
        a.push_back(random_polynomial(rng, deg));
    Expression b = homogeneous ? Expression(0) : random_polynomial(rng, deg);
    return LinearODE(std::move(a), b, I);
}

// Smooth, monotone T with bounded derivatives and nonvanishing X1 on an interval inside (0, 10).
inline PointTransformation random_transformation(std::mt19937_64& rng, const Interval& I, bool with_x0 = true) {
    const Expression t = Expression::t();
    std::uniform_int_distribution<int> pick(0, 5);
    std::uniform_int_distribution<int> k(1, 4);
    Expression T;
    switch (pick(rng)) {
    case 0:
        T = Expression(Rational(k(rng), 2)) * t + Expression(Rational(k(rng) - 2, 3));
        break;
    case 1:
        // Pole at t = -k, outside the interval.
        T = (Expression(2) * t + Expression(1)) / (t + Expression(k(rng)));
        break;
    case 2:
        T = t + Expression(Rational(k(rng), 20)) * pow(t, 3);
        break;
    case 3:
        T = exp(Expression(Rational(k(rng), 4)) * t);
        break;
    case 4:
        T = log(t + Expression(k(rng)));
        break;
    default:
        T = t - atan(t);
        break;
    }
    Expression X1;
    switch (pick(rng) % 3) {
    case 0:
        X1 = exp(Expression(Rational(k(rng) - 2, 4)) * t);
        break;
    case 1:
        X1 = Expression(1) + Expression(Rational(k(rng), 8)) * pow(t, 2);
        break;
    default:
        X1 = Expression(-Rational(k(rng), 2));
        break;
    }
    Expression X0(0);
    if (with_x0) {
        switch (pick(rng) % 3) {
        case 0:
            X0 = random_polynomial(rng, 2);
            break;
        case 1:
            X0 = sin(t);
            break;
        default:
            break;
        }
    }
    return PointTransformation(T, X1, X0, I);
}

// Decreasing fractional linear map with its pole left of I.
inline Expression random_mobius(std::mt19937_64& rng, const Interval& I) {
    std::uniform_int_distribution<int> k(1, 4);
    Rational pole(static_cast<int>(std::floor(I.lo)) - k(rng));
    return Expression(Rational(k(rng), 3)) + pow(Expression::t() - Expression(pole), -1);
}

// Monotone T defined on all of R except Mobius poles placed left of I.
inline Expression random_T(std::mt19937_64& rng, const Interval& I) {
    const Expression t = Expression::t();
    std::uniform_int_distribution<int> pick(0, 3), k(1, 4);
    switch (pick(rng)) {
    case 0:
        return Expression(Rational(k(rng), 2)) * t + Expression(Rational(k(rng) - 2, 3));
    case 1:
        return exp(Expression(Rational(k(rng), 4)) * t);
    case 2:
        return t + Expression(Rational(k(rng), 20)) * pow(t, 3);
    default:
        return random_mobius(rng, I);
    }
}

inline Rational nonzero_rational(std::mt19937_64& rng) {
    Rational c = small_rational(rng);
    return c == 0 ? Rational(1) : c;
}

// Random member of the equivalence group of the class on I.
inline PointTransformation random_member(std::mt19937_64& rng, ClassTag cls, int r, const Interval& I) {
    Expression X1, T;
    Rational c = nonzero_rational(rng);
    switch (cls) {
    case ClassTag::L:
        return random_transformation(rng, I);
    case ClassTag::L1:
        T = random_T(rng, I);
        X1 = Expression(c) * pow(abs(differentiate(T)), Rational(r - 1, 2));
        break;
    case ClassTag::L2:
        T = random_mobius(rng, I);
        X1 = Expression(c) * pow(abs(differentiate(T)), Rational(r - 1, 2));
        break;
    case ClassTag::A1:
        T = random_T(rng, I);
        X1 = Expression(c);
        break;
    case ClassTag::A2:
        T = random_mobius(rng, I);
        X1 = Expression(c) * pow(abs(differentiate(T)), Rational(1, 2));
        break;
    }
    return PointTransformation(T, X1, random_polynomial(rng, 2), I);
}

} // namespace lodeq::testing
