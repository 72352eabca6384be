#include "lodeq/gauge.hpp"

#include "lodeq/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace lodeq {

namespace {

const Expression t_var = Expression::t();

constexpr double kGaugeTol = 1e-12;

void check_t0(const LinearODE& ode, double t0) {
    if (!ode.interval().contains(t0))
        throw InvalidArgument("t0", "t0 must lie in the equation interval");
}

double sup_coeffs(const LinearODE& ode, std::initializer_list<int> orders) {
    double s = 0;
    for (int m : orders)
        s = std::max(s, sup_norm(ode.coeff(m), ode.interval()));
    return s;
}

GaugeResult identity_result(const LinearODE& ode) {
    return GaugeResult{PointTransformation::identity(ode.interval()), ode, 0.0, false, ode.interval()};
}

Interval shrink_or_throw(const std::function<bool(double)>& ok, const Interval& I, double t0) {
    Interval J = shrink_interval(ok, I, t0);
    if (J.length() < 1e-6 * I.length())
        throw DomainError("interval_collapse", "gauge is valid only on a degenerate subinterval around t0");
    return J;
}

// Bounded away from zero with the sign it has at t0, so the walk cannot step over a root.
bool same_side(double v, double at_t0) { return std::abs(v) >= kShrinkThreshold && (v > 0) == (at_t0 > 0); }

IVPSolution unit_solution(const LinearODE& hom, double t0, int i) {
    std::vector<double> init(static_cast<std::size_t>(hom.order()), 0.0);
    init[static_cast<std::size_t>(i)] = 1.0;
    return solve_ivp(hom, t0, init, kGaugeTol);
}

} // namespace

Interval shrink_interval(const std::function<bool(double)>& ok, const Interval& I, double t0, int samples) {
    auto good = [&](double s) {
        try {
            return ok(s);
        } catch (const Error&) {
            return false;
        }
    };
    double h = I.length() / samples;
    Interval J{t0, t0};
    for (double s = t0;;) {
        double next = std::min(s + h, I.hi);
        if (next <= s || !good(next))
            break;
        J.hi = s = next;
        if (next == I.hi)
            break;
    }
    for (double s = t0;;) {
        double next = std::max(s - h, I.lo);
        if (next >= s || !good(next))
            break;
        J.lo = s = next;
        if (next == I.lo)
            break;
    }
    return J;
}

GaugeResult to_rational(const LinearODE& ode) {
    const int r = ode.order();
    if (ode.coeff(r - 1).is_zero())
        return identity_result(ode);
    const Interval& I = ode.interval();
    Expression F = antiderivative(ode.coeff(r - 1), I.mid(), I);
    Expression X1 = exp(Expression(Rational(1, r)) * F);
    PointTransformation tau(t_var, X1, Expression(0), I, t_var);
    LinearODE out = apply_to_ode(tau, ode);
    return GaugeResult{tau, out, sup_coeffs(out, {r - 1}), false, I};
}

GaugeResult to_laguerre_forsyth(const LinearODE& ode, double t0) {
    const int r = ode.order();
    if (r < 3)
        throw InvalidArgument("order", "the Laguerre-Forsyth form needs order at least 3");
    check_t0(ode, t0);
    GaugeResult rat = to_rational(ode);
    const LinearODE& E = rat.gauged;
    const Expression& a = E.coeff(r - 2);
    if (a.is_zero())
        return rat;

    // S(T) = k a is linearised by T = y2/y1 with y'' + (k a / 2) y = 0 and unit Wronskian.
    Rational k(12, r * (r * r - 1));
    LinearODE lin({Expression(k / 2) * a, Expression(0)}, Expression(0), E.interval());
    std::vector<double> d1{1.0, 0.0}, d2{t0, 1.0};
    IVPSolution y1 = solve_ivp(lin, t0, d1, kGaugeTol);
    IVPSolution y2 = solve_ivp(lin, t0, d2, kGaugeTol);
    Interval J = shrink_or_throw([&](double s) { return same_side(evaluate(y1.x(), s), 1.0); }, E.interval(), t0);

    Expression T = y2.x() * pow(y1.x(), -1);
    Expression X1 = pow(y1.x(), -(r - 1));
    PointTransformation lf(T, X1, Expression(0), J);
    LinearODE out = apply_to_ode(lf, E.restricted(J));
    PointTransformation total = compose(lf, rat.tau.restricted(J));
    return GaugeResult{total, out, sup_coeffs(out, {r - 1, r - 2}), !(J == ode.interval()), ode.interval()};
}

GaugeResult to_arnold1(const LinearODE& ode, double t0) {
    check_t0(ode, t0);
    if (ode.coeff(0).is_zero())
        return identity_result(ode);
    IVPSolution phi = unit_solution(ode.homogeneous_part(), t0, 0);
    Interval J = shrink_or_throw([&](double s) { return same_side(evaluate(phi.x(), s), 1.0); }, ode.interval(), t0);
    PointTransformation tau(t_var, pow(phi.x(), -1), Expression(0), J, t_var);
    LinearODE out = apply_to_ode(tau, ode.restricted(J));
    return GaugeResult{tau, out, sup_coeffs(out, {0}), !(J == ode.interval()), ode.interval()};
}

GaugeResult to_arnold2(const LinearODE& ode, double t0) {
    check_t0(ode, t0);
    if (ode.coeff(0).is_zero() && ode.coeff(1).is_zero())
        return identity_result(ode);
    LinearODE hom = ode.homogeneous_part();
    IVPSolution psi1 = unit_solution(hom, t0, 0);
    IVPSolution psi2 = unit_solution(hom, t0, 1);
    Expression T = psi2.x() * pow(psi1.x(), -1);
    Expression Tp = differentiate(T);
    double Tp0 = evaluate(Tp, t0);
    Interval J = shrink_or_throw([&](double s) { return same_side(evaluate(psi1.x(), s), 1.0) && same_side(evaluate(Tp, s), Tp0); },
                                 ode.interval(), t0);
    PointTransformation tau(T, pow(psi1.x(), -1), Expression(0), J);
    LinearODE out = apply_to_ode(tau, ode.restricted(J));
    return GaugeResult{tau, out, sup_coeffs(out, {0, 1}), !(J == ode.interval()), ode.interval()};
}

} // namespace lodeq
