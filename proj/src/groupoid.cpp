#include "lodeq/groupoid.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace lodeq {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

Verdict pass(std::string reason) { return Verdict{true, std::move(reason), 0, NAN}; }

Verdict fail(std::string reason, double worst, double where) { return Verdict{false, std::move(reason), worst, where}; }

// max |d/dt e| / (1 + max |e|) over the samples.
std::pair<double, double> relative_variation(const Expression& e, const Interval& I, int samples) {
    Expression de = differentiate(e);
    double top = 0, where = I.mid(), size = 0;
    for (double s : chebyshev_nodes(I, samples)) {
        Evaluator ev(s);
        double d = std::abs(ev(de));
        size = std::max(size, std::abs(ev(e)));
        if (d > top) {
            top = d;
            where = s;
        }
    }
    return {top / (1 + size), where};
}

std::pair<double, double> sup_with_location(const Expression& e, const Interval& I, int samples) {
    double top = 0, where = I.mid();
    for (double s : chebyshev_nodes(I, samples)) {
        double v = std::abs(evaluate(e, s));
        if (v > top) {
            top = v;
            where = s;
        }
    }
    return {top, where};
}

} // namespace

double solution_defect(const Expression& f, const LinearODE& ode, int samples) {
    const int r = ode.order();
    std::vector<Expression> jet;
    for (int k = 0; k <= r; ++k)
        jet.push_back(differentiate(f, k));
    double worst = 0;
    for (double s : chebyshev_nodes(ode.interval(), samples)) {
        std::vector<double> v = evaluate_many(jet, s);
        double res = v[r], scale = 1 + std::abs(v[r]);
        for (int m = 0; m < r; ++m) {
            double term = evaluate(ode.coeff(m), s) * v[m];
            res += term;
            scale += std::abs(term);
        }
        worst = std::max(worst, std::abs(res) / scale);
    }
    return worst;
}

Verdict verify_admissible(const AdmissibleTransformation& cand, const GroupoidOptions& opts) {
    const LinearODE& src = cand.source;
    if (src.order() != cand.target.order())
        return fail("orders differ", INFINITY, NAN);
    LinearODE mapped = apply_to_ode(cand.tau, src);
    const Interval& J = mapped.interval();
    if (!cand.target.interval().contains(J, 1e-9))
        return fail("target interval does not contain the image interval", INFINITY, NAN);
    Verdict v = pass("coefficients agree");
    auto compare = [&](const Expression& got, const Expression& want, const std::string& name) {
        EquivReport rep = equiv_report(want, got, J, opts.samples, opts.tol);
        if (rep.max_deviation > v.worst || std::isnan(v.where)) {
            v.worst = rep.max_deviation;
            v.where = rep.worst_t;
        }
        if (!rep.equal && v.ok) {
            v.ok = false;
            v.reason = name + " differs by " + fmt(rep.max_deviation) + " at t~ = " + fmt(rep.worst_t);
        }
    };
    for (int m = 0; m < src.order(); ++m)
        compare(mapped.coeff(m), cand.target.coeff(m), "a" + std::to_string(m));
    compare(mapped.rhs(), cand.target.rhs(), "b");
    return v;
}

Verdict in_equivalence_group(const PointTransformation& tau, ClassTag cls, int r, bool homogeneous, const GroupoidOptions& opts) {
    const Interval& I = tau.source();
    if (homogeneous) {
        auto [x0, at] = sup_with_location(tau.X0(), I, opts.samples);
        if (x0 > opts.tol)
            return fail("X0 does not vanish", x0, at);
    }
    auto constant_ratio = [&](const Expression& e, const std::string& what) -> Verdict {
        auto [var, at] = relative_variation(e, I, opts.samples);
        if (var > opts.tol)
            return fail(what + " is not constant", var, at);
        return pass(what + " is constant");
    };
    auto mobius = [&]() -> Verdict {
        auto [s, at] = sup_with_location(schwarzian(tau.T()), I, opts.samples);
        if (s > opts.tol)
            return fail("Schwarzian of T is nonzero", s, at);
        return pass("T is fractional linear");
    };
    Expression absTp = abs(tau.T_prime());
    switch (cls) {
    case ClassTag::L:
        return pass("point transformation of the fiber-preserving shape");
    case ClassTag::L1:
        return constant_ratio(tau.X1() * pow(absTp, -Rational(r - 1, 2)), "X1 |T_t|^{-(r-1)/2}");
    case ClassTag::L2: {
        Verdict v = mobius();
        if (!v)
            return v;
        return constant_ratio(tau.X1() * pow(absTp, -Rational(r - 1, 2)), "X1 |T_t|^{-(r-1)/2}");
    }
    case ClassTag::A1:
        return constant_ratio(tau.X1(), "X1");
    case ClassTag::A2: {
        Verdict v = mobius();
        if (!v)
            return v;
        std::optional<Mobius> m = fit_mobius(tau.T(), I, opts.tol);
        if (!m)
            return fail("Mobius parameters of T could not be recovered", INFINITY, NAN);
        std::vector<double> nodes = chebyshev_nodes(I, opts.samples);
        auto p = [&](double s) { return evaluate(tau.X1(), s) * (m->gamma * s + m->delta); };
        double p0 = p(nodes.front()), worst = 0, at = nodes.front();
        for (double s : nodes) {
            double d = std::abs(p(s) - p0) / (1 + std::abs(p0));
            if (d > worst) {
                worst = d;
                at = s;
            }
        }
        if (worst > opts.tol)
            return fail("X1 (gamma t + delta) is not constant", worst, at);
        return pass("T is fractional linear and X1 = C/(gamma t + delta)");
    }
    }
    return fail("unknown class", INFINITY, NAN);
}

Verdict admissible_shape(const PointTransformation& tau, const LinearODE& source, ClassTag cls, bool homogeneous,
                         const GroupoidOptions& opts) {
    if (!tau.source().contains(source.interval()))
        return fail("transformation is not defined on the source interval", INFINITY, NAN);
    LinearODE hom = source.homogeneous_part();
    auto solves = [&](const Expression& f, const std::string& what) -> Verdict {
        double d = solution_defect(f, hom, 20);
        if (d > opts.tol)
            return fail(what + " does not solve the source equation", d, NAN);
        return pass(what + " solves the source equation");
    };
    Verdict v = pass("no shape constraint");
    switch (cls) {
    case ClassTag::L:
        break;
    case ClassTag::L1:
    case ClassTag::L2:
        v = in_equivalence_group(tau, cls, source.order(), false, opts);
        break;
    case ClassTag::A1:
        v = solves(pow(tau.X1(), -1), "1/X1");
        break;
    case ClassTag::A2:
        v = solves(pow(tau.X1(), -1), "1/X1");
        if (v)
            v = solves(tau.T() * pow(tau.X1(), -1), "T/X1");
        break;
    }
    if (v && homogeneous)
        v = solves(tau.X0() * pow(tau.X1(), -1), "X0/X1");
    return v;
}

} // namespace lodeq
