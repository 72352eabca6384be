#pragma once

#include "lodeq/expr.hpp"
#include "lodeq/ode.hpp"

#include <optional>

namespace lodeq {

// Fiber-preserving point transformation t~ = T(t), x~ = X1(t) x + X0(t).
class PointTransformation {
public:
    // Checks T_t and X1 are nonvanishing on the source interval; inverts T.
    PointTransformation(Expression T, Expression X1, Expression X0, Interval source);
    // Same, with a known inverse of T (an expression in the target variable).
    PointTransformation(Expression T, Expression X1, Expression X0, Interval source, Expression T_inverse);

    static PointTransformation identity(const Interval& I);

    const Expression& T() const { return T_; }
    const Expression& X1() const { return X1_; }
    const Expression& X0() const { return X0_; }
    const Expression& T_prime() const { return Tp_; }
    const Expression& T_inverse() const { return Tinv_; }
    const Interval& source() const { return source_; }
    const Interval& target() const { return target_; }
    bool increasing() const { return increasing_; }

    PointTransformation restricted(const Interval& sub) const;

private:
    void validate();

    Expression T_, X1_, X0_, Tp_, Tinv_;
    Interval source_, target_;
    bool increasing_ = true;
};

// Closed-form inverse of a monotone T on I when one is found, else a numeric inverse node.
Expression invert_function(const Expression& T, const Interval& I);

LinearODE apply_to_ode(const PointTransformation& tau, const LinearODE& ode);
// Image of a solution x(t): s -> X1 x + X0 evaluated at t = T^{-1}(s).
Expression transport_solution(const PointTransformation& tau, const Expression& x);
// tau2 after tau1.
PointTransformation compose(const PointTransformation& tau2, const PointTransformation& tau1);
PointTransformation invert(const PointTransformation& tau);

Expression schwarzian(const Expression& T);

struct Mobius {
    double alpha = 1, beta = 0, gamma = 0, delta = 1;
};

// Fits T = (alpha t + beta)/(gamma t + delta) with |alpha delta - beta gamma| = 1 and alpha >= 0.
std::optional<Mobius> fit_mobius(const Expression& T, const Interval& I, double tol = 1e-7);

bool same_transformation(const PointTransformation& a, const PointTransformation& b, double tol = 1e-8, int samples = 50);

} // namespace lodeq
