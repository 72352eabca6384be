#pragma once

#include "lodeq/expr.hpp"

#include <set>
#include <span>
#include <string>
#include <vector>

namespace lodeq {

// x^{(r)} + a_{r-1} x^{(r-1)} + ... + a_0 x = b on an interval.
class LinearODE {
public:
    LinearODE(std::vector<Expression> coeffs, Expression rhs, Interval interval);

    int order() const { return static_cast<int>(coeffs_.size()); }
    const std::vector<Expression>& coeffs() const { return coeffs_; }
    const Expression& coeff(int m) const { return coeffs_.at(static_cast<std::size_t>(m)); }
    const Expression& rhs() const { return rhs_; }
    const Interval& interval() const { return interval_; }

    LinearODE homogeneous_part() const;
    LinearODE restricted(const Interval& sub) const;
    LinearODE with_coeffs(std::vector<Expression> coeffs) const;
    bool is_closed_form() const;

private:
    std::vector<Expression> coeffs_;
    Expression rhs_;
    Interval interval_;
};

// x^{(r)} + sum a_m(t) x^{(m)} - b(t) for the jet (x, x', ..., x^{(r)}).
double residual(const LinearODE& ode, std::span<const double> jet, double t);

enum class ClassTag { L, L1, L2, A1, A2 };

std::string to_string(ClassTag c);
ClassTag parse_class_tag(const std::string& s);

struct FormSet {
    std::set<ClassTag> tags;
    bool homogeneous = false;
    bool contains(ClassTag c) const { return tags.count(c) > 0; }
};

// Identically-zero test: structural zero, or |e| <= tol at the samples.
bool is_zero_function(const Expression& e, const Interval& I, double tol = 1e-7, int samples = 50);

FormSet form_of(const LinearODE& ode, double tol = 1e-7, int samples = 50);

} // namespace lodeq
