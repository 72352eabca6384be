#pragma once

#include "lodeq/expr.hpp"
#include "lodeq/ode.hpp"

#include <deque>
#include <functional>
#include <limits>
#include <mutex>
#include <span>

namespace lodeq {

struct SolverOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    double max_step = std::numeric_limits<double>::infinity();
    long max_steps = 200000;
};

// Piecewise DOP853 dense output over an interval.
class DenseTrajectory {
public:
    struct Segment {
        double t_old = 0;
        double h = 0;
        std::vector<double> y_old;
        // kInterpolatorPower rows of length dim.
        std::vector<std::vector<double>> F;
    };

    DenseTrajectory(int dim, Interval interval, std::vector<Segment> segments);

    int dim() const { return dim_; }
    const Interval& interval() const { return interval_; }
    std::size_t steps() const { return segments_.size(); }
    double value(int component, double t) const;
    // Derivative of the interpolating polynomial itself.
    double slope(int component, double t) const;

private:
    const Segment& locate(double t) const;

    int dim_;
    Interval interval_;
    std::vector<Segment> segments_;
};

using OdeRhs = std::function<void(double t, const double* y, double* dydt)>;

// Integrates y' = f(t, y) from t0 to both ends of I.
DenseTrajectory integrate_dop853(const OdeRhs& f, int dim, double t0, std::span<const double> y0, const Interval& I,
                                 const SolverOptions& opts = {});

// x^{(r)} + sum a_m x^{(m)} = b for r >= 1 (r = 1 covers quadrature).
struct LinearSystem {
    std::vector<Expression> coeffs;
    Expression rhs;
    Interval interval;
    int order() const { return static_cast<int>(coeffs.size()); }
};

// Solution of a linear IVP. Orders below r read the dense state; higher orders use
// x^{(k)} = sum beta_{k,m} x^{(m)} + gamma_k obtained by differentiating the equation.
class LinearSolutionLeaf : public NumericLeaf {
public:
    LinearSolutionLeaf(std::string id, LinearSystem sys, std::shared_ptr<const DenseTrajectory> traj, int max_order,
                       std::string provenance);

    const LinearSystem& system() const { return sys_; }
    const DenseTrajectory& trajectory() const { return *traj_; }

protected:
    double compute(int k, double t) const override;

private:
    struct Relation {
        std::vector<Expression> beta;
        Expression gamma;
    };
    const Relation& relation(int k) const;

    LinearSystem sys_;
    std::shared_ptr<const DenseTrajectory> traj_;
    mutable std::mutex mutex_;
    mutable std::deque<Relation> relations_;
};

struct IVPSolution {
    std::shared_ptr<const LinearSolutionLeaf> leaf;
    double tolerance = 0;

    Expression x() const { return make_leaf(leaf, 0); }
    Expression derivative(int k) const { return make_leaf(leaf, k); }
    const DenseTrajectory& trajectory() const { return leaf->trajectory(); }
};

IVPSolution solve_ivp(const LinearSystem& sys, double t0, std::span<const double> init, const SolverOptions& opts = {},
                      const std::string& label = "ivp");
// Initial data (x, x', ..., x^{(r-1)}) at t0.
IVPSolution solve_ivp(const LinearODE& ode, double t0, std::span<const double> init, double tol = 1e-10);

// F with F' = e and F(t0) = 0 on I: closed form when found, else a quadrature leaf.
Expression antiderivative(const Expression& e, double t0, const Interval& I, double tol = 1e-12);

} // namespace lodeq
