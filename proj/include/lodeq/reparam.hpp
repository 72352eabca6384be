#pragma once

#include "lodeq/ode.hpp"
#include "lodeq/rational.hpp"
#include "lodeq/transform.hpp"

#include <vector>

namespace lodeq {

struct FundamentalSystem {
    std::vector<Expression> chi;
    Interval interval;

    int order() const { return static_cast<int>(chi.size()); }
};

// Determinant of the matrix whose row m holds d^m f_j / dt^m, for m in rows.
Expression derivative_determinant(const std::vector<Expression>& fs, const std::vector<int>& rows);

Expression wronskian(const std::vector<Expression>& fs);
Expression wronskian(const FundamentalSystem& fs);
// Same as wronskian but over rows 0..r with row `skip` removed.
Expression wronskian_minor(const FundamentalSystem& fs, int skip);

// Throws DomainError "wronskian_vanishes" if W is negligible at a sample, relative to the column sizes.
void check_fundamental(const FundamentalSystem& fs, int samples = 50);

LinearODE coefficients_from_fundamental_system(const FundamentalSystem& fs);

// chi_i solves the homogeneous part with the i-th unit jet at t0.
FundamentalSystem fundamental_system(const LinearODE& ode, double t0);

struct GaugeMatrix {
    std::vector<std::vector<Rational>> mu;
    std::vector<Rational> nu;

    static GaugeMatrix identity(int r);
    Rational determinant() const;
};

FundamentalSystem apply_gauge(const FundamentalSystem& fs, const GaugeMatrix& g);

// Subclass constraints on the reparameterization.
bool is_rational_system(const FundamentalSystem& fs, double tol = 1e-7, int samples = 50);
bool is_laguerre_forsyth_system(const FundamentalSystem& fs, double tol = 1e-7, int samples = 50);
bool is_arnold1_system(const FundamentalSystem& fs);
bool is_arnold2_system(const FundamentalSystem& fs);

// chi_i -> X1 chi_i written in the target variable.
FundamentalSystem transport_system(const PointTransformation& tau, const FundamentalSystem& fs);

// X1/T_t^r (b + W(chi, X0/X1)/W(chi)) as a function of the source variable.
Expression reparam_rhs(const PointTransformation& tau, const FundamentalSystem& fs, const Expression& b);

} // namespace lodeq
