#include "lodeq/polynomial.hpp"

#include <algorithm>

namespace lodeq {

void trim(Poly& p) {
    while (!p.empty() && p.back() == 0)
        p.pop_back();
}

int degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

Poly poly_add(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i)
        r[i] += b[i];
    trim(r);
    return r;
}

Poly poly_scale(const Poly& a, const Rational& c) {
    Poly r = a;
    for (auto& x : r)
        x *= c;
    trim(r);
    return r;
}

Poly poly_sub(const Poly& a, const Poly& b) { return poly_add(a, poly_scale(b, -1)); }

Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty())
        return {};
    Poly r(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            r[i + j] += a[i] * b[j];
    trim(r);
    return r;
}

void poly_divmod(const Poly& a, const Poly& b, Poly& q, Poly& r) {
    if (b.empty())
        throw InvalidArgument("division_by_zero", "polynomial division by zero");
    r = a;
    trim(r);
    q.assign(r.size() >= b.size() ? r.size() - b.size() + 1 : 0, Rational(0));
    while (!r.empty() && r.size() >= b.size()) {
        std::size_t shift = r.size() - b.size();
        Rational c = r.back() / b.back();
        q[shift] = c;
        for (std::size_t i = 0; i < b.size(); ++i)
            r[i + shift] -= c * b[i];
        r.pop_back();
        trim(r);
    }
    trim(q);
}

Poly poly_monic(const Poly& p) {
    if (p.empty())
        return p;
    return poly_scale(p, Rational(1) / p.back());
}

Poly poly_gcd(Poly a, Poly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly q, r;
        poly_divmod(a, b, q, r);
        a = std::move(b);
        b = std::move(r);
    }
    return poly_monic(a);
}

Poly poly_derivative(const Poly& p) {
    Poly r;
    for (std::size_t i = 1; i < p.size(); ++i)
        r.push_back(p[i] * static_cast<long>(i));
    trim(r);
    return r;
}

Rational poly_eval(const Poly& p, const Rational& x) {
    Rational v = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it)
        v = v * x + *it;
    return v;
}

namespace {

Poly poly_pow(const Poly& p, long n) {
    Poly r{Rational(1)};
    for (long i = 0; i < n; ++i)
        r = poly_mul(r, p);
    return r;
}

RationalFunction reduce(RationalFunction f) {
    trim(f.num);
    trim(f.den);
    if (f.num.empty())
        return {{}, {Rational(1)}};
    Poly g = poly_gcd(f.num, f.den);
    if (degree(g) > 0) {
        Poly q, r;
        poly_divmod(f.num, g, q, r);
        f.num = q;
        poly_divmod(f.den, g, q, r);
        f.den = q;
    }
    Rational lead = f.den.back();
    f.num = poly_scale(f.num, Rational(1) / lead);
    f.den = poly_scale(f.den, Rational(1) / lead);
    return f;
}

constexpr long kMaxPower = 64;

} // namespace

std::optional<Poly> as_polynomial(const Expression& e) {
    switch (e.kind()) {
    case Kind::Constant: {
        Poly p{e.value()};
        trim(p);
        return p;
    }
    case Kind::Variable:
        return Poly{Rational(0), Rational(1)};
    case Kind::Sum: {
        Poly acc;
        for (const auto& a : e.args()) {
            auto p = as_polynomial(a);
            if (!p)
                return std::nullopt;
            acc = poly_add(acc, *p);
        }
        return acc;
    }
    case Kind::Product: {
        Poly acc{Rational(1)};
        for (const auto& a : e.args()) {
            auto p = as_polynomial(a);
            if (!p)
                return std::nullopt;
            acc = poly_mul(acc, *p);
        }
        return acc;
    }
    case Kind::Power: {
        if (!is_integer(e.exponent()) || e.exponent() < 0 || e.exponent() > kMaxPower)
            return std::nullopt;
        auto b = as_polynomial(e.arg());
        if (!b)
            return std::nullopt;
        return poly_pow(*b, static_cast<long>(numerator(e.exponent())));
    }
    default:
        return std::nullopt;
    }
}

std::optional<RationalFunction> as_rational_function(const Expression& e) {
    switch (e.kind()) {
    case Kind::Constant:
    case Kind::Variable:
        return reduce({*as_polynomial(e), {Rational(1)}});
    case Kind::Sum: {
        RationalFunction acc{{}, {Rational(1)}};
        for (const auto& a : e.args()) {
            auto f = as_rational_function(a);
            if (!f)
                return std::nullopt;
            acc = reduce({poly_add(poly_mul(acc.num, f->den), poly_mul(f->num, acc.den)), poly_mul(acc.den, f->den)});
        }
        return acc;
    }
    case Kind::Product: {
        RationalFunction acc{{Rational(1)}, {Rational(1)}};
        for (const auto& a : e.args()) {
            auto f = as_rational_function(a);
            if (!f)
                return std::nullopt;
            acc = reduce({poly_mul(acc.num, f->num), poly_mul(acc.den, f->den)});
        }
        return acc;
    }
    case Kind::Power: {
        if (!is_integer(e.exponent()) || abs(e.exponent()) > kMaxPower)
            return std::nullopt;
        auto b = as_rational_function(e.arg());
        if (!b)
            return std::nullopt;
        long n = static_cast<long>(numerator(e.exponent()));
        if (n >= 0)
            return reduce({poly_pow(b->num, n), poly_pow(b->den, n)});
        if (b->num.empty())
            return std::nullopt;
        return reduce({poly_pow(b->den, -n), poly_pow(b->num, -n)});
    }
    default:
        return std::nullopt;
    }
}

Expression to_expression(const Poly& p) {
    std::vector<Expression> terms;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] != 0)
            terms.push_back(Expression(p[i]) * pow(Expression::t(), static_cast<long>(i)));
    return make_sum(std::move(terms));
}

Expression to_expression(const RationalFunction& f) {
    if (degree(f.den) <= 0)
        return to_expression(poly_scale(f.num, Rational(1) / f.den.at(0)));
    return to_expression(f.num) / to_expression(f.den);
}

} // namespace lodeq
