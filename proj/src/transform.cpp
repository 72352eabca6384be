#include "lodeq/transform.hpp"

#include "lodeq/polynomial.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace lodeq {

namespace {

const Expression t_var = Expression::t();

std::vector<double> validation_points(const Interval& I) {
    std::vector<double> pts = chebyshev_nodes(I, 50);
    pts.push_back(I.lo);
    pts.push_back(I.hi);
    return pts;
}

std::optional<Expression> peel(const Expression& e, const Expression& y, const Interval& I) {
    switch (e.kind()) {
    case Kind::Variable:
        return y;
    case Kind::Sum:
    case Kind::Product: {
        std::vector<Expression> fixed;
        std::optional<Expression> moving;
        for (const auto& a : e.args()) {
            if (!a.depends_on_t())
                fixed.push_back(a);
            else if (moving)
                return std::nullopt;
            else
                moving = a;
        }
        if (!moving)
            return std::nullopt;
        if (e.kind() == Kind::Sum)
            return peel(*moving, y - make_sum(fixed), I);
        return peel(*moving, y / make_product(fixed), I);
    }
    case Kind::Power: {
        const Rational& p = e.exponent();
        Rational ip = Rational(1) / p;
        double um;
        try {
            um = evaluate(e.arg(), I.mid());
        } catch (const Error&) {
            return std::nullopt;
        }
        if (um < 0 && numerator(p) % 2 == 0)
            return peel(e.arg(), -pow(y, ip), I);
        return peel(e.arg(), pow(y, ip), I);
    }
    case Kind::Exp:
        return peel(e.arg(), log(y), I);
    case Kind::Log:
        return peel(e.arg(), exp(y), I);
    case Kind::Atan:
        return peel(e.arg(), tan(y), I);
    case Kind::Tan:
        return peel(e.arg(), atan(y), I);
    default:
        return std::nullopt;
    }
}

bool inverse_checks(const Expression& T, const Expression& cand, const Interval& I) {
    for (double x : chebyshev_nodes(I, 9)) {
        try {
            double back = evaluate(cand, evaluate(T, x));
            if (!(std::abs(back - x) <= 1e-9 * (1 + std::abs(x))))
                return false;
        } catch (const Error&) {
            return false;
        }
    }
    return true;
}

} // namespace

Expression invert_function(const Expression& T, const Interval& I) {
    if (T.kind() == Kind::Variable)
        return t_var;
    if (T.is_closed_form()) {
        auto rf = as_rational_function(T);
        if (rf && degree(rf->num) <= 1 && degree(rf->den) <= 1) {
            Rational beta = rf->num.size() > 0 ? rf->num[0] : Rational(0);
            Rational alpha = rf->num.size() > 1 ? rf->num[1] : Rational(0);
            Rational delta = rf->den[0];
            Rational gamma = rf->den.size() > 1 ? rf->den[1] : Rational(0);
            if (alpha * delta - beta * gamma != 0) {
                Expression cand = (Expression(delta) * t_var - Expression(beta)) / (Expression(alpha) - Expression(gamma) * t_var);
                if (inverse_checks(T, cand, I))
                    return cand;
            }
        }
        if (auto p = peel(T, t_var, I); p && inverse_checks(T, *p, I))
            return *p;
    }
    return make_inverse(T, I, t_var);
}

PointTransformation::PointTransformation(Expression T, Expression X1, Expression X0, Interval source)
    : T_(std::move(T)), X1_(std::move(X1)), X0_(std::move(X0)), source_(source) {
    validate();
    Tinv_ = invert_function(T_, source_);
}

PointTransformation::PointTransformation(Expression T, Expression X1, Expression X0, Interval source, Expression T_inverse)
    : T_(std::move(T)), X1_(std::move(X1)), X0_(std::move(X0)), Tinv_(std::move(T_inverse)), source_(source) {
    validate();
}

PointTransformation PointTransformation::identity(const Interval& I) {
    return PointTransformation(t_var, Expression(1), Expression(0), I, t_var);
}

void PointTransformation::validate() {
    if (!source_.valid())
        throw InvalidArgument("interval", "transformation interval must satisfy lo < hi");
    Tp_ = differentiate(T_);
    int tp_sign = 0;
    int x1_sign = 0;
    for (double x : validation_points(source_)) {
        double tp, x1;
        try {
            Evaluator ev(x);
            tp = ev(Tp_);
            x1 = ev(X1_);
            ev(X0_);
        } catch (const Error& e) {
            throw DomainError("unevaluable_transformation", std::string("transformation not evaluable on its interval: ") + e.what());
        }
        int s1 = tp > 0 ? 1 : (tp < 0 ? -1 : 0);
        int s2 = x1 > 0 ? 1 : (x1 < 0 ? -1 : 0);
        if (s1 == 0 || (tp_sign != 0 && s1 != tp_sign))
            throw DomainError("degenerate_jacobian", "T_t vanishes on the interval");
        if (s2 == 0 || (x1_sign != 0 && s2 != x1_sign))
            throw DomainError("vanishing_x1", "X1 vanishes on the interval");
        tp_sign = s1;
        x1_sign = s2;
    }
    increasing_ = tp_sign > 0;
    double a = evaluate(T_, source_.lo);
    double b = evaluate(T_, source_.hi);
    target_ = Interval{std::min(a, b), std::max(a, b)};
}

PointTransformation PointTransformation::restricted(const Interval& sub) const {
    if (!source_.contains(sub))
        throw InvalidArgument("interval", "restriction must lie inside the source interval");
    return PointTransformation(T_, X1_, X0_, sub, Tinv_);
}

LinearODE apply_to_ode(const PointTransformation& tau, const LinearODE& ode) {
    if (!tau.source().contains(ode.interval()))
        throw InvalidArgument("interval_mismatch", "transformation source interval must contain the equation interval");
    const int r = ode.order();
    const Expression& Tp = tau.T_prime();
    Expression P = pow(Tp, -1);
    Expression L = differentiate(tau.X1()) * pow(tau.X1(), -1);

    // abar[k][m]: coefficient of x^{(m)} in d^k x~/ds^k, divided by X1.
    std::vector<std::vector<Expression>> abar(r + 1);
    abar[0] = {Expression(1)};
    for (int k = 0; k < r; ++k) {
        abar[k + 1].resize(k + 2);
        for (int m = 0; m <= k + 1; ++m) {
            std::vector<Expression> terms;
            if (m <= k) {
                terms.push_back(differentiate(abar[k][m]));
                terms.push_back(L * abar[k][m]);
            }
            if (m >= 1)
                terms.push_back(abar[k][m - 1]);
            abar[k + 1][m] = make_sum(std::move(terms)) * P;
        }
    }
    std::vector<Expression> beta(r + 1);
    beta[0] = tau.X0();
    for (int k = 0; k < r; ++k)
        beta[k + 1] = differentiate(beta[k]) * P;

    std::vector<Expression> at(r);
    for (int m = r - 1; m >= 0; --m) {
        std::vector<Expression> terms{-abar[r][m], abar[r][r] * ode.coeff(m)};
        for (int j = m + 1; j < r; ++j)
            terms.push_back(-(at[j] * abar[j][m]));
        at[m] = make_sum(std::move(terms)) * pow(Tp, m);
    }
    std::vector<Expression> bterms{beta[r], tau.X1() * abar[r][r] * ode.rhs()};
    for (int j = 0; j < r; ++j)
        bterms.push_back(at[j] * beta[j]);
    Expression bt = make_sum(std::move(bterms));

    const Expression& inv = tau.T_inverse();
    std::vector<Expression> coeffs;
    for (const auto& a : at)
        coeffs.push_back(substitute(a, inv));
    double lo = evaluate(tau.T(), ode.interval().lo);
    double hi = evaluate(tau.T(), ode.interval().hi);
    return LinearODE(std::move(coeffs), substitute(bt, inv), Interval{std::min(lo, hi), std::max(lo, hi)});
}

Expression transport_solution(const PointTransformation& tau, const Expression& x) {
    return substitute(tau.X1() * x + tau.X0(), tau.T_inverse());
}

PointTransformation compose(const PointTransformation& tau2, const PointTransformation& tau1) {
    if (!tau2.source().contains(tau1.target(), 1e-9))
        throw InvalidArgument("interval_mismatch", "outer transformation must be defined on the image of the inner one");
    const Expression& T1 = tau1.T();
    Expression X1_2 = substitute(tau2.X1(), T1);
    Expression T = substitute(tau2.T(), T1);
    Expression X1 = X1_2 * tau1.X1();
    Expression X0 = X1_2 * tau1.X0() + substitute(tau2.X0(), T1);
    Expression inv = substitute(tau1.T_inverse(), tau2.T_inverse());
    return PointTransformation(T, X1, X0, tau1.source(), inv);
}

PointTransformation invert(const PointTransformation& tau) {
    const Expression& inv = tau.T_inverse();
    Expression x1 = substitute(tau.X1(), inv);
    Expression x0 = substitute(tau.X0(), inv);
    return PointTransformation(inv, pow(x1, -1), -(x0 * pow(x1, -1)), tau.target(), tau.T());
}

Expression schwarzian(const Expression& T) {
    Expression d1 = differentiate(T);
    Expression d2 = differentiate(d1);
    Expression d3 = differentiate(d2);
    Expression inv = pow(d1, -1);
    return d3 * inv - Expression(Rational(3, 2)) * pow(d2 * inv, 2);
}

std::optional<Mobius> fit_mobius(const Expression& T, const Interval& I, double tol) {
    auto pts = chebyshev_nodes(I, 12);
    Eigen::MatrixXd A(pts.size(), 4);
    double scale = std::max({1.0, std::abs(I.lo), std::abs(I.hi)});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double x = pts[i] / scale;
        double y;
        try {
            y = evaluate(T, pts[i]);
        } catch (const Error&) {
            return std::nullopt;
        }
        A.row(static_cast<Eigen::Index>(i)) << x, 1.0, -y * x, -y;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    Eigen::Vector4d v = svd.matrixV().col(3);
    Mobius m{v(0) / scale, v(1), v(2) / scale, v(3)};
    double det = m.alpha * m.delta - m.beta * m.gamma;
    if (std::abs(det) < 1e-14)
        return std::nullopt;
    double s = 1.0 / std::sqrt(std::abs(det));
    if (m.alpha < 0 || (m.alpha == 0 && m.beta < 0))
        s = -s;
    m = Mobius{m.alpha * s, m.beta * s, m.gamma * s, m.delta * s};
    for (double x : chebyshev_nodes(I, 50)) {
        double y = evaluate(T, x);
        double den = m.gamma * x + m.delta;
        if (den == 0.0)
            return std::nullopt;
        double fit = (m.alpha * x + m.beta) / den;
        if (!(std::abs(fit - y) <= tol * (1 + std::abs(y))))
            return std::nullopt;
    }
    return m;
}

bool same_transformation(const PointTransformation& a, const PointTransformation& b, double tol, int samples) {
    const Interval& I = a.source();
    return equiv_numeric(a.T(), b.T(), I, samples, tol) && equiv_numeric(a.X1(), b.X1(), I, samples, tol) &&
           equiv_numeric(a.X0(), b.X0(), I, samples, tol);
}

} // namespace lodeq
