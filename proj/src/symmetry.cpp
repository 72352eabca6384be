#include "lodeq/symmetry.hpp"

#include "lodeq/gauge.hpp"
#include "lodeq/numeric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace lodeq {

namespace {

const Expression t_var = Expression::t();

} // namespace

VectorFieldLin lie_bracket(const VectorFieldLin& a, const VectorFieldLin& b) {
    VectorFieldLin c;
    c.tau = a.tau * differentiate(b.tau) - b.tau * differentiate(a.tau);
    c.xi1 = a.tau * differentiate(b.xi1) - b.tau * differentiate(a.xi1);
    c.xi0 = a.tau * differentiate(b.xi0) - b.tau * differentiate(a.xi0) + a.xi0 * b.xi1 - b.xi0 * a.xi1;
    return c;
}

bool same_field(const VectorFieldLin& a, const VectorFieldLin& b, const Interval& I, double tol) {
    return equiv_numeric(a.tau, b.tau, I, 20, tol) && equiv_numeric(a.xi1, b.xi1, I, 20, tol) &&
           equiv_numeric(a.xi0, b.xi0, I, 20, tol);
}

VectorFieldLin R_field(int r, const Expression& tau) {
    return VectorFieldLin{tau, Expression(Rational(r - 1, 2)) * differentiate(tau), Expression(0)};
}

SL2Realization SL2Realization::make(int r) {
    SL2Realization s;
    s.r = r;
    s.P = R_field(r, Expression(1));
    s.D = R_field(r, t_var);
    s.K = R_field(r, pow(t_var, 2));
    return s;
}

InvarianceDefect invariance_defect(const VectorFieldLin& Q, const LinearODE& ode) {
    const int r = ode.order();
    Expression tp = differentiate(Q.tau);
    // eta^{(k)} = sum_j c[k][j] x^{(j)} + d[k].
    std::vector<std::vector<Expression>> c(r + 1);
    std::vector<Expression> d(r + 1);
    c[0] = {Q.xi1};
    d[0] = Q.xi0;
    for (int k = 0; k < r; ++k) {
        c[k + 1].assign(k + 2, Expression(0));
        for (int j = 0; j <= k; ++j) {
            c[k + 1][j] = c[k + 1][j] + differentiate(c[k][j]);
            c[k + 1][j + 1] = c[k + 1][j + 1] + c[k][j];
        }
        c[k + 1][k + 1] = c[k + 1][k + 1] - tp;
        d[k + 1] = differentiate(d[k]);
    }
    std::vector<Expression> coef(r + 1, Expression(0));
    Expression cst = d[r] - Q.tau * differentiate(ode.rhs());
    for (int j = 0; j <= r; ++j)
        coef[j] = c[r][j];
    for (int m = 0; m < r; ++m) {
        const Expression& a = ode.coeff(m);
        if (a.is_zero())
            continue;
        coef[m] = coef[m] + Q.tau * differentiate(a);
        for (int j = 0; j <= m; ++j)
            coef[j] = coef[j] + a * c[m][j];
        cst = cst + a * d[m];
    }
    InvarianceDefect out;
    out.rho.resize(r);
    for (int j = 0; j < r; ++j)
        out.rho[j] = coef[j] - coef[r] * ode.coeff(j);
    out.rho_const = cst + coef[r] * ode.rhs();
    return out;
}

namespace {

double unit_jet_sup(const InvarianceDefect& def, double t0) {
    Evaluator ev(t0);
    double c = std::abs(ev(def.rho_const));
    double worst = c;
    for (const auto& rho : def.rho)
        worst = std::max(worst, c + std::abs(ev(rho)));
    return worst;
}

} // namespace

double prolong_residual(const VectorFieldLin& Q, const LinearODE& ode, double t0) {
    return unit_jet_sup(invariance_defect(Q, ode), t0);
}

double invariance_residual(const VectorFieldLin& Q, const LinearODE& ode, int samples) {
    InvarianceDefect def = invariance_defect(Q, ode);
    double worst = 0;
    for (double s : chebyshev_nodes(ode.interval(), samples))
        worst = std::max(worst, unit_jet_sup(def, s));
    return worst;
}

LinearODE canonical_family(FamilyKind kind, int r, const std::vector<Rational>& c, const Interval& I) {
    if (r < 3)
        throw InvalidArgument("order", "the extension families need order at least 3");
    if (static_cast<int>(c.size()) != r - 2)
        throw InvalidArgument("family_constants", "expected constants c_0..c_{r-3}");
    std::vector<Expression> a(r, Expression(0));
    switch (kind) {
    case FamilyKind::Constant:
        for (int m = 0; m <= r - 3; ++m)
            a[m] = Expression(c[m]);
        break;
    case FamilyKind::Euler:
        if (I.contains(0.0))
            throw InvalidArgument("interval", "the Euler family needs an interval excluding t = 0");
        for (int m = 0; m <= r - 3; ++m)
            a[m] = Expression(c[m]) * pow(t_var, m - r);
        break;
    case FamilyKind::Projective: {
        Expression w = Expression(1) + pow(t_var, 2);
        a[r - 3] = Expression(c[r - 3]) * pow(w, -3);
        Interval J{std::min(I.lo, 0.0), std::max(I.hi, 0.0)};
        if (J.length() == 0)
            J.hi = 1;
        for (int m = r - 4; m >= 0; --m) {
            Expression F = antiderivative(pow(w, r - m - 1) * a[m + 1], 0.0, J);
            a[m] = (Expression(c[m]) - Expression((m + 1) * (r - m - 1)) * F) * pow(w, m - r);
        }
        break;
    }
    }
    return LinearODE(std::move(a), Expression(0), I);
}

std::string to_string(CaseLabel c) {
    switch (c) {
    case CaseLabel::Generic:
        return "generic";
    case CaseLabel::ConstantEquivalent:
        return "constant-equivalent";
    default:
        return "elementary";
    }
}

std::string to_string(Confidence c) {
    switch (c) {
    case Confidence::Exact:
        return "exact";
    case Confidence::Pattern:
        return "pattern";
    default:
        return "numeric";
    }
}

namespace {

bool all_zero(const LinearODE& ode) {
    for (const auto& a : ode.coeffs())
        if (!a.is_zero())
            return false;
    return true;
}

bool matches(const Expression& a, const Expression& b, const Interval& I, double tol) {
    try {
        return equiv_numeric(a, b, I, 30, tol);
    } catch (const Error&) {
        return false;
    }
}

double value_at(const Expression& e, double t) {
    try {
        double v = evaluate(e, t);
        return std::isfinite(v) ? v : NAN;
    } catch (const Error&) {
        return NAN;
    }
}

// Constant-coefficient, Euler and projective patterns of a rational-form equation.
std::optional<std::pair<std::string, PointTransformation>> match_pattern(const LinearODE& E, double tol) {
    const int r = E.order();
    const Interval& I = E.interval();
    Rational half_r1(r - 1, 2);

    bool constant = true;
    for (int m = 0; m < r && constant; ++m) {
        const Expression& a = E.coeff(m);
        if (a.is_constant())
            continue;
        constant = matches(a, Expression(nice_rational(value_at(a, I.mid()))), I, tol) ||
                   sup_norm(differentiate(a), I) <= tol;
    }
    if (constant)
        return std::make_pair(std::string("constant"), PointTransformation::identity(I));

    if (!I.contains(0.0) && I.lo != 0.0 && I.hi != 0.0) {
        double anchor = I.lo > 0 ? 1.0 : -1.0;
        bool euler = true;
        for (int m = 0; m < r && euler; ++m) {
            // t^{r-m} a_m read at the anchor, verified on the interval.
            double v = value_at(E.coeff(m), anchor);
            if (!std::isfinite(v))
                v = value_at(E.coeff(m), I.mid()) * std::pow(I.mid(), r - m);
            else
                v *= std::pow(anchor, r - m);
            if (!std::isfinite(v)) {
                euler = false;
                break;
            }
            Expression cm(nice_rational(v));
            euler = matches(E.coeff(m), cm * pow(t_var, m - r), I, tol);
        }
        if (euler) {
            Expression s = I.lo > 0 ? t_var : -t_var;
            PointTransformation w(log(s), pow(s, -half_r1), Expression(0), I);
            return std::make_pair(std::string("euler"), w);
        }
    }

    if (E.coeff(r - 2).is_zero() || sup_norm(E.coeff(r - 2), I) <= tol) {
        std::vector<Rational> c(r - 2);
        bool ok = true;
        for (int m = 0; m <= r - 3 && ok; ++m) {
            double v = value_at(E.coeff(m), 0.0);
            ok = std::isfinite(v);
            if (ok)
                c[m] = nice_rational(v);
        }
        if (ok) {
            LinearODE fam = canonical_family(FamilyKind::Projective, r, c, I);
            for (int m = 0; m < r && ok; ++m)
                ok = matches(E.coeff(m), fam.coeff(m), I, tol);
            if (ok) {
                Expression w = Expression(1) + pow(t_var, 2);
                PointTransformation tau(atan(t_var), pow(w, -half_r1), Expression(0), I, tan(t_var));
                return std::make_pair(std::string("projective"), tau);
            }
        }
    }
    return std::nullopt;
}

struct Extension {
    int dimension = 0;
    std::vector<Expression> basis;
    // Kernel vectors as combinations of the basis.
    std::vector<Eigen::Vector3d> kernel;
};

// Dimension of {tau : R(tau) is a symmetry} for a rational-form equation. Candidates are the
// products y_i y_j of solutions of y'' + (6 a_{r-2} / (r(r^2-1))) y = 0.
Extension symmetry_extension(const LinearODE& E, const ClassifyOptions& opts) {
    const int r = E.order();
    const Interval& I = E.interval();
    double t0 = I.mid();
    const Expression& a = E.coeff(r - 2);
    Extension ext;
    if (a.is_zero()) {
        ext.basis = {Expression(1), t_var - Expression(nice_rational(t0)),
                     pow(t_var - Expression(nice_rational(t0)), 2)};
    } else {
        LinearODE lin({Expression(Rational(6, r * (r * r - 1))) * a, Expression(0)}, Expression(0), I);
        IVPSolution y1 = solve_ivp(lin, t0, std::vector<double>{1.0, 0.0}, 1e-12);
        IVPSolution y2 = solve_ivp(lin, t0, std::vector<double>{0.0, 1.0}, 1e-12);
        ext.basis = {pow(y1.x(), 2), y1.x() * y2.x(), pow(y2.x(), 2)};
    }

    // Each candidate column is scaled by the size of its derivatives up to order r + 1.
    std::vector<double> nodes = chebyshev_nodes(I, opts.samples);
    Eigen::MatrixXd M(static_cast<Eigen::Index>(nodes.size()) * r, 3);
    Eigen::Vector3d scale;
    for (int i = 0; i < 3; ++i) {
        InvarianceDefect def = invariance_defect(R_field(r, ext.basis[i]), E);
        scale(i) = 0;
        for (int k = 0; k <= r + 1; ++k)
            scale(i) += sup_norm(differentiate(ext.basis[i], k), I);
        for (std::size_t s = 0; s < nodes.size(); ++s) {
            Evaluator ev(nodes[s]);
            for (int j = 0; j < r; ++j)
                M(static_cast<Eigen::Index>(s) * r + j, i) = ev(def.rho[j]) / scale(i);
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double thr = opts.tol * std::sqrt(static_cast<double>(M.rows()));
    for (int i = 0; i < 3; ++i)
        if (sv(i) <= thr) {
            ++ext.dimension;
            ext.kernel.push_back(svd.matrixV().col(i).cwiseQuotient(scale));
        }
    return ext;
}

// s = int dt / tau with X1 = |tau|^{-(r-1)/2} straightens R(tau) to d/ds.
std::optional<PointTransformation> rectifying_map(const Expression& tau, int r, const Interval& I) {
    for (double s : chebyshev_nodes(I, 50))
        if (std::abs(evaluate(tau, s)) < 1e-6)
            return std::nullopt;
    double sign = evaluate(tau, I.mid()) > 0 ? 1.0 : -1.0;
    Expression st = Expression(nice_rational(sign)) * tau;
    Expression S = antiderivative(pow(st, -1), I.mid(), I);
    try {
        return PointTransformation(Expression(nice_rational(sign)) * S, pow(st, -Rational(r - 1, 2)), Expression(0), I);
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::optional<PointTransformation> chain(const std::optional<PointTransformation>& outer, const PointTransformation& inner) {
    if (!outer)
        return std::nullopt;
    return compose(*outer, inner);
}

} // namespace

SymmetryClassification classify_dimension(const LinearODE& ode, const ClassifyOptions& opts) {
    const int r = ode.order();
    SymmetryClassification out;
    if (r == 2) {
        out.dimension = 8;
        out.label = CaseLabel::Elementary;
        out.confidence = Confidence::Exact;
        out.pattern = "elementary";
        try {
            out.witness = to_arnold2(ode, ode.interval().mid()).tau;
        } catch (const Error&) {
        }
        return out;
    }

    // An inhomogeneous equation is mapped to its homogeneous part by x -> x - x_p.
    const Interval& I = ode.interval();
    PointTransformation prefix = PointTransformation::identity(I);
    if (!ode.rhs().is_zero()) {
        std::vector<double> zero(static_cast<std::size_t>(r), 0.0);
        IVPSolution xp = solve_ivp(ode, I.mid(), zero);
        prefix = PointTransformation(t_var, Expression(1), -xp.x(), I, t_var);
    }
    LinearODE H = ode.homogeneous_part();
    GaugeResult rat = to_rational(H);
    PointTransformation base = compose(rat.tau, prefix);
    const LinearODE& E = rat.gauged;

    if (all_zero(E)) {
        out.dimension = r + 4;
        out.label = CaseLabel::Elementary;
        out.confidence = Confidence::Exact;
        out.pattern = "elementary";
        out.extension = 3;
        out.witness = base;
        return out;
    }

    Extension ext = symmetry_extension(E, opts);
    out.extension = ext.dimension;
    if (ext.dimension >= 2) {
        // A two-dimensional extension forces the elementary equation.
        out.dimension = r + 4;
        out.label = CaseLabel::Elementary;
        out.confidence = Confidence::Numeric;
        out.pattern = "elementary";
        try {
            GaugeResult lf = to_laguerre_forsyth(H, I.mid());
            out.witness = compose(lf.tau, prefix.restricted(lf.tau.source()));
        } catch (const Error&) {
        }
        return out;
    }
    if (ext.dimension == 0) {
        out.dimension = r + 1;
        out.label = CaseLabel::Generic;
        out.confidence = Confidence::Numeric;
        return out;
    }

    out.dimension = r + 2;
    out.label = CaseLabel::ConstantEquivalent;
    if (auto pat = match_pattern(E, opts.tol)) {
        out.pattern = pat->first;
        out.confidence = Confidence::Pattern;
        out.witness = chain(pat->second, base);
        return out;
    }
    out.pattern = "rectified";
    out.confidence = Confidence::Numeric;
    const Eigen::Vector3d& v = ext.kernel.front();
    Expression tau = Expression(nice_rational(v(0))) * ext.basis[0] + Expression(nice_rational(v(1))) * ext.basis[1] +
                     Expression(nice_rational(v(2))) * ext.basis[2];
    tau = Expression(nice_rational(1.0 / sup_norm(tau, E.interval()))) * tau;
    out.witness = chain(rectifying_map(tau, r, E.interval()), base);
    return out;
}

} // namespace lodeq
