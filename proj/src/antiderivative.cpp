#include "lodeq/numeric.hpp"
#include "lodeq/polynomial.hpp"

#include <cmath>
#include <optional>

namespace lodeq {

namespace {

const Expression t_var = Expression::t();

Expression integrate_poly(const Poly& p) {
    Poly q(p.size() + 1);
    for (std::size_t i = 0; i < p.size(); ++i)
        q[i + 1] = p[i] / static_cast<long>(i + 1);
    trim(q);
    return to_expression(q);
}

// u = alpha t + beta with alpha != 0.
bool affine(const Expression& u, Rational& alpha) {
    auto p = as_polynomial(u);
    if (!p || degree(*p) != 1)
        return false;
    alpha = (*p)[1];
    return true;
}

std::vector<Integer> divisors(Integer n) {
    if (n < 0)
        n = -n;
    std::vector<Integer> out;
    if (n == 0 || n > 1000000)
        return out;
    long v = static_cast<long>(n);
    for (long d = 1; d * d <= v; ++d)
        if (v % d == 0) {
            out.push_back(d);
            if (d * d != v)
                out.push_back(v / d);
        }
    return out;
}

// Rational roots of a square-free polynomial; strips them from p.
std::optional<std::vector<Rational>> rational_roots(Poly& p) {
    std::vector<Rational> roots;
    while (!p.empty() && p[0] == 0) {
        roots.push_back(0);
        p.erase(p.begin());
    }
    if (degree(p) <= 0)
        return roots;
    Integer l = 1;
    for (const auto& c : p)
        l = lcm(l, Integer(denominator(c)));
    std::vector<Integer> z;
    for (const auto& c : p)
        z.push_back(Integer(numerator(c) * (l / denominator(c))));
    auto ps = divisors(z.front());
    auto qs = divisors(z.back());
    if (ps.empty() || qs.empty())
        return std::nullopt;
    for (const auto& a : ps)
        for (const auto& b : qs)
            for (int sgn : {1, -1}) {
                Rational cand(sgn * a, b);
                if (degree(p) >= 1 && poly_eval(p, cand) == 0) {
                    Poly q, r;
                    poly_divmod(p, Poly{-cand, Rational(1)}, q, r);
                    p = q;
                    roots.push_back(cand);
                }
            }
    return roots;
}

// Square-free decomposition: f = prod a_i^i (Yun).
std::vector<std::pair<Poly, int>> square_free(const Poly& f) {
    std::vector<std::pair<Poly, int>> out;
    Poly fp = poly_derivative(f);
    Poly b = poly_gcd(f, fp);
    Poly c, d, rem;
    poly_divmod(f, b, c, rem);
    Poly fpb;
    poly_divmod(fp, b, fpb, rem);
    d = poly_sub(fpb, poly_derivative(c));
    int i = 1;
    while (degree(c) > 0) {
        Poly a = poly_gcd(c, d);
        Poly cn;
        poly_divmod(c, a, cn, rem);
        Poly dn;
        poly_divmod(d, a, dn, rem);
        d = poly_sub(dn, poly_derivative(cn));
        c = cn;
        if (degree(a) > 0)
            out.emplace_back(poly_monic(a), i);
        ++i;
    }
    return out;
}

Poly poly_power(const Poly& p, int n) {
    Poly r{Rational(1)};
    for (int i = 0; i < n; ++i)
        r = poly_mul(r, p);
    return r;
}

bool solve_exact(std::vector<std::vector<Rational>> M, std::vector<Rational> rhs, std::vector<Rational>& x) {
    std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && M[piv][col] == 0)
            ++piv;
        if (piv == n)
            return false;
        std::swap(M[piv], M[col]);
        std::swap(rhs[piv], rhs[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || M[r][col] == 0)
                continue;
            Rational f = M[r][col] / M[col][col];
            for (std::size_t c = col; c < n; ++c)
                M[r][c] -= f * M[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = rhs[i] / M[i][i];
    return true;
}

struct Term {
    enum Kind { Linear, Quadratic } kind;
    Poly factor;
    Rational root;
    int power;
};

Expression sqrt_const(const Rational& q) {
    Rational r;
    if (exact_root(q, 2, r))
        return Expression(r);
    return pow(Expression(q), Rational(1, 2));
}

// Integral of 1/Q^j with Q = t^2 + p t + q irreducible.
Expression integral_inverse_quadratic(const Rational& p, const Rational& q, int j) {
    Expression Q = pow(t_var, 2) + Expression(p) * t_var + Expression(q);
    Rational k2 = q - p * p / 4;
    Expression k = sqrt_const(k2);
    Expression u = t_var + Expression(p / 2);
    Expression I = pow(k, -1) * atan(u * pow(k, -1));
    for (int i = 1; i < j; ++i) {
        Rational c = Rational(1) / (2 * i * k2);
        I = Expression(c) * u * pow(Q, -i) + Expression(c * (2 * i - 1)) * I;
    }
    return I;
}

std::optional<Expression> integrate_rational(const RationalFunction& rf, const Interval& I) {
    Poly q, rem;
    poly_divmod(rf.num, rf.den, q, rem);
    Expression result = integrate_poly(q);
    if (rem.empty())
        return result;
    const Poly& D = rf.den;
    std::vector<Term> terms;
    for (auto& [S, mult] : square_free(D)) {
        Poly rest = S;
        auto roots = rational_roots(rest);
        if (!roots)
            return std::nullopt;
        for (const auto& rho : *roots) {
            if (to_double(rho) >= I.lo && to_double(rho) <= I.hi)
                throw DomainError("nonintegrable_singularity", "integrand has a pole inside the interval");
            terms.push_back({Term::Linear, Poly{-rho, Rational(1)}, rho, mult});
        }
        if (degree(rest) == 2) {
            Poly m = poly_monic(rest);
            if (m[1] * m[1] - 4 * m[0] >= 0)
                return std::nullopt;
            terms.push_back({Term::Quadratic, m, 0, mult});
        } else if (degree(rest) > 0)
            return std::nullopt;
    }
    // Unknown numerators; build the linear system by matching coefficients.
    std::vector<Poly> basis;
    struct Slot {
        std::size_t term;
        int j;
        bool times_t;
    };
    std::vector<Slot> slots;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        for (int j = 1; j <= terms[i].power; ++j) {
            Poly cof, r;
            poly_divmod(D, poly_power(terms[i].factor, j), cof, r);
            if (terms[i].kind == Term::Linear) {
                basis.push_back(cof);
                slots.push_back({i, j, false});
            } else {
                basis.push_back(poly_mul(cof, Poly{Rational(0), Rational(1)}));
                slots.push_back({i, j, true});
                basis.push_back(cof);
                slots.push_back({i, j, false});
            }
        }
    }
    std::size_t n = static_cast<std::size_t>(degree(D));
    if (basis.size() != n)
        return std::nullopt;
    std::vector<std::vector<Rational>> M(n, std::vector<Rational>(n));
    std::vector<Rational> rhs(n);
    for (std::size_t row = 0; row < n; ++row) {
        for (std::size_t c = 0; c < n; ++c)
            M[row][c] = row < basis[c].size() ? basis[c][row] : Rational(0);
        rhs[row] = row < rem.size() ? rem[row] : Rational(0);
    }
    std::vector<Rational> x;
    if (!solve_exact(M, rhs, x))
        return std::nullopt;
    std::vector<Expression> parts{result};
    for (std::size_t s = 0; s < slots.size(); ++s) {
        if (x[s] == 0)
            continue;
        const Term& term = terms[slots[s].term];
        int j = slots[s].j;
        if (term.kind == Term::Linear) {
            Expression lin = t_var - Expression(term.root);
            if (j == 1)
                parts.push_back(Expression(x[s]) * log(abs(lin)));
            else
                parts.push_back(Expression(x[s] / (1 - j)) * pow(lin, 1 - j));
            continue;
        }
        const Rational& p = term.factor[1];
        const Rational& qq = term.factor[0];
        Expression Q = to_expression(term.factor);
        if (slots[s].times_t) {
            // B t = (B/2)(2t + p) - B p / 2
            Rational B = x[s];
            if (j == 1)
                parts.push_back(Expression(B / 2) * log(Q));
            else
                parts.push_back(Expression(B / 2 / (1 - j)) * pow(Q, 1 - j));
            parts.push_back(Expression(-B * p / 2) * integral_inverse_quadratic(p, qq, j));
        } else
            parts.push_back(Expression(x[s]) * integral_inverse_quadratic(p, qq, j));
    }
    return make_sum(std::move(parts));
}

std::optional<Expression> integrate(const Expression& e, const Interval& I) {
    if (!e.depends_on_t())
        return e * t_var;
    if (!e.is_closed_form())
        return std::nullopt;
    if (auto p = as_polynomial(e))
        return integrate_poly(*p);
    if (e.kind() == Kind::Sum) {
        std::vector<Expression> parts;
        bool ok = true;
        for (const auto& a : e.args()) {
            auto r = integrate(a, I);
            if (!r) {
                ok = false;
                break;
            }
            parts.push_back(*r);
        }
        if (ok)
            return make_sum(std::move(parts));
    }
    if (e.kind() == Kind::Product && e.arg(0).is_constant()) {
        std::vector<Expression> rest(e.args().begin() + 1, e.args().end());
        if (auto r = integrate(make_product(std::move(rest)), I))
            return e.arg(0) * *r;
        return std::nullopt;
    }
    Rational alpha;
    switch (e.kind()) {
    case Kind::Exp:
        if (affine(e.arg(), alpha))
            return Expression(Rational(1) / alpha) * e;
        break;
    case Kind::Sin:
        if (affine(e.arg(), alpha))
            return Expression(-Rational(1) / alpha) * cos(e.arg());
        break;
    case Kind::Cos:
        if (affine(e.arg(), alpha))
            return Expression(Rational(1) / alpha) * sin(e.arg());
        break;
    case Kind::Log: {
        const Expression& u = e.arg();
        const Expression& inner = u.kind() == Kind::Abs ? u.arg() : u;
        if (affine(inner, alpha))
            return Expression(Rational(1) / alpha) * (inner * e - inner);
        break;
    }
    case Kind::Atan:
        if (affine(e.arg(), alpha)) {
            const Expression& u = e.arg();
            return Expression(Rational(1) / alpha) * (u * e - Expression(Rational(1, 2)) * log(Expression(1) + pow(u, 2)));
        }
        break;
    case Kind::Power:
        if (affine(e.arg(), alpha) && e.exponent() != -1 && !is_integer(e.exponent())) {
            Rational p1 = e.exponent() + 1;
            return Expression(Rational(1) / (p1 * alpha)) * pow(e.arg(), p1);
        }
        break;
    default:
        break;
    }
    if (auto rf = as_rational_function(e))
        return integrate_rational(*rf, I);
    return std::nullopt;
}

void check_integrable(const Expression& e, const Interval& I) {
    std::vector<double> pts = chebyshev_nodes(I, 64);
    pts.push_back(I.lo);
    pts.push_back(I.hi);
    for (double x : pts) {
        try {
            evaluate(e, x);
        } catch (const Error&) {
            throw DomainError("nonintegrable_singularity", "integrand is singular inside the interval");
        }
    }
}

} // namespace

Expression antiderivative(const Expression& e, double t0, const Interval& I, double tol) {
    if (!I.contains(t0))
        throw InvalidArgument("anchor", "anchor point outside the interval");
    if (e.is_zero())
        return Expression(0);
    check_integrable(e, I);
    if (auto F = integrate(e, I)) {
        Expression anchor = substitute(*F, Expression(nice_rational(t0)));
        return *F - anchor;
    }
    SolverOptions opts;
    opts.atol = opts.rtol = tol;
    double zero = 0.0;
    IVPSolution sol = solve_ivp(LinearSystem{{Expression(0)}, e, I}, t0, std::span<const double>(&zero, 1), opts, "quad");
    return sol.x();
}

} // namespace lodeq
