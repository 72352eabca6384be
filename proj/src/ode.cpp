#include "lodeq/ode.hpp"

#include <cmath>

namespace lodeq {

LinearODE::LinearODE(std::vector<Expression> coeffs, Expression rhs, Interval interval)
    : coeffs_(std::move(coeffs)), rhs_(std::move(rhs)), interval_(interval) {
    if (coeffs_.size() < 2)
        throw InvalidArgument("order", "order must be at least 2");
    if (!interval_.valid())
        throw InvalidArgument("interval", "interval must satisfy lo < hi");
    std::vector<Expression> all = coeffs_;
    all.push_back(rhs_);
    double mid = interval_.mid();
    try {
        evaluate_many(all, mid);
    } catch (const Error& e) {
        throw DomainError("unevaluable_coefficient", std::string("coefficient not evaluable at interval midpoint: ") + e.what());
    }
}

LinearODE LinearODE::homogeneous_part() const { return LinearODE(coeffs_, Expression(0), interval_); }

LinearODE LinearODE::restricted(const Interval& sub) const {
    if (!interval_.contains(sub))
        throw InvalidArgument("interval", "restriction must lie inside the validity interval");
    return LinearODE(coeffs_, rhs_, sub);
}

LinearODE LinearODE::with_coeffs(std::vector<Expression> coeffs) const { return LinearODE(std::move(coeffs), rhs_, interval_); }

bool LinearODE::is_closed_form() const {
    for (const auto& a : coeffs_)
        if (!a.is_closed_form())
            return false;
    return rhs_.is_closed_form();
}

double residual(const LinearODE& ode, std::span<const double> jet, double t) {
    int r = ode.order();
    if (static_cast<int>(jet.size()) != r + 1)
        throw InvalidArgument("jet_size", "jet must hold x, x', ..., x^(r)");
    Evaluator ev(t);
    double s = jet[r] - ev(ode.rhs());
    for (int m = 0; m < r; ++m)
        s += ev(ode.coeff(m)) * jet[m];
    return s;
}

std::string to_string(ClassTag c) {
    switch (c) {
    case ClassTag::L:
        return "L";
    case ClassTag::L1:
        return "L1";
    case ClassTag::L2:
        return "L2";
    case ClassTag::A1:
        return "A1";
    case ClassTag::A2:
        return "A2";
    }
    return "?";
}

ClassTag parse_class_tag(const std::string& s) {
    if (s == "L")
        return ClassTag::L;
    if (s == "L1")
        return ClassTag::L1;
    if (s == "L2")
        return ClassTag::L2;
    if (s == "A1")
        return ClassTag::A1;
    if (s == "A2")
        return ClassTag::A2;
    throw InvalidArgument("class_tag", "unknown class tag: " + s);
}

bool is_zero_function(const Expression& e, const Interval& I, double tol, int samples) {
    if (e.is_zero())
        return true;
    if (e.is_constant())
        return false;
    return sup_norm(e, I, samples) <= tol;
}

FormSet form_of(const LinearODE& ode, double tol, int samples) {
    const Interval& I = ode.interval();
    int r = ode.order();
    FormSet fs;
    fs.tags.insert(ClassTag::L);
    fs.homogeneous = is_zero_function(ode.rhs(), I, tol, samples);
    if (is_zero_function(ode.coeff(r - 1), I, tol, samples)) {
        fs.tags.insert(ClassTag::L1);
        if (is_zero_function(ode.coeff(r - 2), I, tol, samples))
            fs.tags.insert(ClassTag::L2);
    }
    if (is_zero_function(ode.coeff(0), I, tol, samples)) {
        fs.tags.insert(ClassTag::A1);
        if (r >= 3 && is_zero_function(ode.coeff(1), I, tol, samples))
            fs.tags.insert(ClassTag::A2);
    }
    return fs;
}

} // namespace lodeq
