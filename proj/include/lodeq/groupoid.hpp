#pragma once

#include "lodeq/ode.hpp"
#include "lodeq/transform.hpp"

#include <cmath>
#include <string>

namespace lodeq {

// (source, target, tau) with tau mapping source onto target.
struct AdmissibleTransformation {
    LinearODE source;
    LinearODE target;
    PointTransformation tau;
};

struct Verdict {
    bool ok = false;
    std::string reason;
    // Worst deviation seen and where (source or target coordinate as appropriate).
    double worst = 0;
    double where = NAN;

    explicit operator bool() const { return ok; }
};

struct GroupoidOptions {
    double tol = 1e-7;
    int samples = 50;
};

Verdict verify_admissible(const AdmissibleTransformation& cand, const GroupoidOptions& opts = {});

// Structural membership in the equivalence group of a class; homogeneous adds X0 = 0.
Verdict in_equivalence_group(const PointTransformation& tau, ClassTag cls, int r, bool homogeneous = false,
                             const GroupoidOptions& opts = {});

// Shape every admissible transformation of the class must have, checked against the source
// equation: 1/X1 (and T/X1 for A2) solve it, and for homogeneous classes X0/X1 solves it.
Verdict admissible_shape(const PointTransformation& tau, const LinearODE& source, ClassTag cls, bool homogeneous = false,
                         const GroupoidOptions& opts = {});

// Max over samples of the residual of f against the homogeneous part, relative to the term sizes.
double solution_defect(const Expression& f, const LinearODE& ode, int samples = 20);

} // namespace lodeq
