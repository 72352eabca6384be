#pragma once

#include "lodeq/ode.hpp"
#include "lodeq/transform.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lodeq {

// Q = tau(t) d/dt + (xi1(t) x + xi0(t)) d/dx.
struct VectorFieldLin {
    Expression tau{0};
    Expression xi1{0};
    Expression xi0{0};
};

VectorFieldLin lie_bracket(const VectorFieldLin& a, const VectorFieldLin& b);
bool same_field(const VectorFieldLin& a, const VectorFieldLin& b, const Interval& I, double tol = 1e-9);

// R(tau) = tau d/dt + ((r-1)/2) tau_t x d/dx.
VectorFieldLin R_field(int r, const Expression& tau);

struct SL2Realization {
    int r = 3;
    VectorFieldLin P, D, K;
    static SL2Realization make(int r);
};

// On-solution defect of the r-th prolongation of Q applied to the equation, written as
// rho_0 x + ... + rho_{r-1} x^{(r-1)} + rho_const after eliminating x^{(r)}.
struct InvarianceDefect {
    std::vector<Expression> rho;
    Expression rho_const{0};
};

InvarianceDefect invariance_defect(const VectorFieldLin& Q, const LinearODE& ode);
// Sup of the defect over the unit jets (+-e_j) at t0.
double prolong_residual(const VectorFieldLin& Q, const LinearODE& ode, double t0);
// Max of prolong_residual over Chebyshev samples of the equation interval.
double invariance_residual(const VectorFieldLin& Q, const LinearODE& ode, int samples = 20);

enum class FamilyKind { Constant, Euler, Projective };

// Members of the r+2 families; c holds c_0..c_{r-3}.
LinearODE canonical_family(FamilyKind kind, int r, const std::vector<Rational>& c, const Interval& I);

enum class CaseLabel { Generic, ConstantEquivalent, Elementary };
enum class Confidence { Exact, Pattern, Numeric };

std::string to_string(CaseLabel c);
std::string to_string(Confidence c);

struct SymmetryClassification {
    int dimension = 0;
    CaseLabel label = CaseLabel::Generic;
    std::optional<PointTransformation> witness;
    Confidence confidence = Confidence::Numeric;
    // constant | euler | projective | rectified | elementary | none
    std::string pattern = "none";
    // Dimension of the R(tau) part of the algebra found numerically (-1 when not computed).
    int extension = -1;
};

struct ClassifyOptions {
    double tol = 1e-7;
    int samples = 24;
};

SymmetryClassification classify_dimension(const LinearODE& ode, const ClassifyOptions& opts = {});

} // namespace lodeq
