#include "lodeq/reparam.hpp"

#include "lodeq/error.hpp"
#include "lodeq/numeric.hpp"

#include <cmath>
#include <unordered_map>

namespace lodeq {

namespace {

// Laplace expansion along successive rows, memoised on the set of columns still free.
class CofactorExpansion {
public:
    explicit CofactorExpansion(std::vector<std::vector<Expression>> rows) : rows_(std::move(rows)) {}

    Expression determinant() { return minor(0, (1u << rows_.size()) - 1); }

private:
    Expression minor(std::size_t row, unsigned cols) {
        if (cols == 0)
            return Expression(1);
        auto it = memo_.find(cols);
        if (it != memo_.end())
            return it->second;
        std::vector<Expression> terms;
        int sign = 1;
        for (std::size_t j = 0; j < rows_.size(); ++j) {
            if (!(cols & (1u << j)))
                continue;
            const Expression& entry = rows_[row][j];
            if (!entry.is_zero()) {
                Expression term = entry * minor(row + 1, cols & ~(1u << j));
                terms.push_back(sign > 0 ? term : -term);
            }
            sign = -sign;
        }
        Expression out = make_sum(std::move(terms));
        memo_.emplace(cols, out);
        return out;
    }

    std::vector<std::vector<Expression>> rows_;
    std::unordered_map<unsigned, Expression> memo_;
};

std::vector<int> range(int n) {
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = i;
    return out;
}

bool vanishes(const Expression& e, const FundamentalSystem& fs, double tol, int samples) {
    if (e.is_zero())
        return true;
    // Normalize by the Wronskian so the test is scale-free under gauge actions.
    Expression W = wronskian(fs);
    for (double s : chebyshev_nodes(fs.interval, samples)) {
        Evaluator ev(s);
        if (std::abs(ev(e) / ev(W)) > tol)
            return false;
    }
    return true;
}

} // namespace

Expression derivative_determinant(const std::vector<Expression>& fs, const std::vector<int>& rows) {
    if (rows.size() != fs.size())
        throw InvalidArgument("shape", "determinant needs as many rows as functions");
    if (fs.size() > 16)
        throw InvalidArgument("shape", "determinant order too large");
    std::vector<std::vector<Expression>> m;
    for (int k : rows) {
        std::vector<Expression> row;
        for (const Expression& f : fs)
            row.push_back(differentiate(f, k));
        m.push_back(std::move(row));
    }
    return CofactorExpansion(std::move(m)).determinant();
}

Expression wronskian(const std::vector<Expression>& fs) { return derivative_determinant(fs, range(static_cast<int>(fs.size()))); }

Expression wronskian(const FundamentalSystem& fs) { return wronskian(fs.chi); }

Expression wronskian_minor(const FundamentalSystem& fs, int skip) {
    std::vector<int> rows;
    for (int m = 0; m <= fs.order(); ++m)
        if (m != skip)
            rows.push_back(m);
    return derivative_determinant(fs.chi, rows);
}

void check_fundamental(const FundamentalSystem& fs, int samples) {
    const int r = fs.order();
    if (r < 1)
        throw InvalidArgument("order", "fundamental system needs at least one function");
    Expression W = wronskian(fs);
    std::vector<Expression> jet;
    for (int i = 0; i < r; ++i)
        for (const Expression& c : fs.chi)
            jet.push_back(differentiate(c, i));
    for (double s : chebyshev_nodes(fs.interval, samples)) {
        Evaluator ev(s);
        // Hadamard bound over the columns.
        double bound = 1;
        for (int j = 0; j < r; ++j) {
            double norm2 = 0;
            for (int i = 0; i < r; ++i) {
                double v = ev(jet[static_cast<std::size_t>(i * r + j)]);
                norm2 += v * v;
            }
            bound *= std::sqrt(norm2);
        }
        double w = ev(W);
        if (!(std::abs(w) > 1e-13 * bound))
            throw DomainError("wronskian_vanishes", "Wronskian vanishes near t = " + std::to_string(s));
    }
}

LinearODE coefficients_from_fundamental_system(const FundamentalSystem& fs) {
    check_fundamental(fs);
    const int r = fs.order();
    Expression invW = pow(wronskian(fs), -1);
    std::vector<Expression> a;
    for (int m = 0; m < r; ++m) {
        Expression minor = wronskian_minor(fs, m);
        a.push_back((r + m) % 2 == 0 ? minor * invW : -(minor * invW));
    }
    return LinearODE(std::move(a), Expression(0), fs.interval);
}

FundamentalSystem fundamental_system(const LinearODE& ode, double t0) {
    if (!ode.interval().contains(t0))
        throw InvalidArgument("t0", "t0 must lie in the interval");
    LinearODE hom = ode.homogeneous_part();
    const int r = hom.order();
    FundamentalSystem fs{{}, hom.interval()};
    for (int i = 0; i < r; ++i) {
        std::vector<double> init(static_cast<std::size_t>(r), 0.0);
        init[static_cast<std::size_t>(i)] = 1.0;
        fs.chi.push_back(solve_ivp(hom, t0, init).x());
    }
    return fs;
}

GaugeMatrix GaugeMatrix::identity(int r) {
    GaugeMatrix g;
    g.mu.assign(static_cast<std::size_t>(r), std::vector<Rational>(static_cast<std::size_t>(r), Rational(0)));
    for (int i = 0; i < r; ++i)
        g.mu[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    return g;
}

Rational GaugeMatrix::determinant() const {
    std::vector<std::vector<Rational>> m = mu;
    const std::size_t n = m.size();
    Rational det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        if (m[c].size() != n)
            throw InvalidArgument("shape", "gauge matrix must be square");
        std::size_t p = c;
        while (p < n && m[p][c] == 0)
            ++p;
        if (p == n)
            return 0;
        if (p != c) {
            std::swap(m[p], m[c]);
            det = -det;
        }
        det *= m[c][c];
        for (std::size_t i = c + 1; i < n; ++i) {
            if (m[i][c] == 0)
                continue;
            Rational f = m[i][c] / m[c][c];
            for (std::size_t j = c; j < n; ++j)
                m[i][j] -= f * m[c][j];
        }
    }
    return det;
}

FundamentalSystem apply_gauge(const FundamentalSystem& fs, const GaugeMatrix& g) {
    const std::size_t r = fs.chi.size();
    if (g.mu.size() != r)
        throw InvalidArgument("shape", "gauge matrix size does not match the system order");
    if (g.determinant() == 0)
        throw InvalidArgument("singular_gauge", "gauge matrix is singular");
    FundamentalSystem out{{}, fs.interval};
    for (std::size_t i = 0; i < r; ++i) {
        std::vector<Expression> terms;
        for (std::size_t j = 0; j < r; ++j)
            if (g.mu[i][j] != 0)
                terms.push_back(Expression(g.mu[i][j]) * fs.chi[j]);
        out.chi.push_back(make_sum(std::move(terms)));
    }
    return out;
}

bool is_rational_system(const FundamentalSystem& fs, double tol, int samples) {
    return vanishes(wronskian_minor(fs, fs.order() - 1), fs, tol, samples);
}

bool is_laguerre_forsyth_system(const FundamentalSystem& fs, double tol, int samples) {
    return fs.order() >= 2 && is_rational_system(fs, tol, samples) &&
           vanishes(wronskian_minor(fs, fs.order() - 2), fs, tol, samples);
}

bool is_arnold1_system(const FundamentalSystem& fs) { return fs.order() >= 1 && fs.chi[0].is_one(); }

bool is_arnold2_system(const FundamentalSystem& fs) {
    return fs.order() >= 2 && fs.chi[0].is_one() && fs.chi[1] == Expression::t();
}

FundamentalSystem transport_system(const PointTransformation& tau, const FundamentalSystem& fs) {
    PointTransformation linear(tau.T(), tau.X1(), Expression(0), tau.source(), tau.T_inverse());
    FundamentalSystem out{{}, tau.target()};
    for (const Expression& c : fs.chi)
        out.chi.push_back(transport_solution(linear, c));
    return out;
}

Expression reparam_rhs(const PointTransformation& tau, const FundamentalSystem& fs, const Expression& b) {
    const int r = fs.order();
    std::vector<Expression> ext = fs.chi;
    ext.push_back(tau.X0() * pow(tau.X1(), -1));
    Expression ratio = wronskian(ext) * pow(wronskian(fs), -1);
    return tau.X1() * pow(tau.T_prime(), -r) * (b + ratio);
}

} // namespace lodeq
