#pragma once

#include "lodeq/error.hpp"
#include "lodeq/interval.hpp"
#include "lodeq/rational.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace lodeq {

// Order matters: it is the primary key of the canonical ordering.
enum class Kind : int {
    Constant,
    Variable,
    Sum,
    Product,
    Power,
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Atan,
    Abs,
    Leaf,
    Inverse,
};

class NumericLeaf;
struct Node;

// Immutable expression in the single variable t. Copies share structure.
class Expression {
public:
    Expression();
    Expression(int v);
    Expression(const Rational& v);
    explicit Expression(std::shared_ptr<const Node> p) : p_(std::move(p)) {}

    static Expression t();

    Kind kind() const;
    const Rational& value() const;
    const Rational& exponent() const;
    const std::vector<Expression>& args() const;
    const Expression& arg(std::size_t i = 0) const;
    const std::shared_ptr<const NumericLeaf>& leaf() const;
    int order() const;
    const Interval& domain() const;
    // f' for an inverse node.
    Expression inverse_derivative() const;
    std::size_t hash() const;
    const Node* node() const { return p_.get(); }
    const std::shared_ptr<const Node>& shared() const { return p_; }

    bool is_constant() const;
    bool is_zero() const;
    bool is_one() const;
    bool depends_on_t() const;
    // True when no numeric leaf or numeric inverse occurs.
    bool is_closed_form() const;

    friend bool operator==(const Expression& a, const Expression& b);

private:
    std::shared_ptr<const Node> p_;
};

struct Node {
    Kind kind = Kind::Constant;
    Rational q;
    std::vector<Expression> args;
    std::shared_ptr<const NumericLeaf> leaf;
    int order = 0;
    Interval domain;
    std::shared_ptr<const Node> aux;
    std::size_t hash = 0;
    double dval = 0.0;
    bool closed = true;
    bool has_t = false;
};

struct ExpressionHash {
    std::size_t operator()(const Expression& e) const { return e.hash(); }
};

// Total canonical order; deterministic across runs.
int compare(const Expression& a, const Expression& b);

Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);

Expression make_sum(std::vector<Expression> terms);
Expression make_product(std::vector<Expression> factors);
Expression pow(const Expression& base, const Rational& e);
Expression sqrt(const Expression& u);
Expression exp(const Expression& u);
Expression log(const Expression& u);
Expression sin(const Expression& u);
Expression cos(const Expression& u);
Expression tan(const Expression& u);
Expression atan(const Expression& u);
Expression abs(const Expression& u);

// Value of the k-th derivative of a numeric leaf at arg.
Expression make_leaf(std::shared_ptr<const NumericLeaf> leaf, int order, const Expression& arg = Expression::t());
// f^{-1}(arg) for f monotone on domain.
Expression make_inverse(const Expression& f, const Interval& domain, const Expression& arg = Expression::t());

Expression differentiate(const Expression& e, int k = 1);
// Replace t by value.
Expression substitute(const Expression& e, const Expression& value);
Expression normalize(const Expression& e);

double evaluate(const Expression& e, double t);
std::vector<double> evaluate_many(std::span<const Expression> es, double t);

// Memoised evaluation at a fixed point; reuse for several expressions sharing subterms.
class Evaluator {
public:
    explicit Evaluator(double t) : t_(t) {}
    double operator()(const Expression& e);

private:
    double eval(const Node* n);
    double t_;
    std::unordered_map<const Node*, double> memo_;
};

std::vector<double> chebyshev_nodes(const Interval& I, int n);

struct EquivReport {
    bool equal = true;
    double max_deviation = 0.0;
    double worst_t = 0.0;
};

// Sample-based comparison: |e1 - e2| <= tol * (1 + |e1|) at n Chebyshev nodes.
EquivReport equiv_report(const Expression& e1, const Expression& e2, const Interval& I, int n = 50, double tol = 1e-9);
bool equiv_numeric(const Expression& e1, const Expression& e2, const Interval& I, int n = 50, double tol = 1e-9);

// Largest |e| over n Chebyshev nodes.
double sup_norm(const Expression& e, const Interval& I, int n = 50);

std::string to_string(const Expression& e);

// Abstract numerically represented function with derivatives up to max_order.
class NumericLeaf {
public:
    NumericLeaf(std::string id, Interval interval, int max_order, std::string provenance);
    virtual ~NumericLeaf() = default;

    const std::string& id() const { return id_; }
    const Interval& interval() const { return interval_; }
    int max_order() const { return max_order_; }
    const std::string& provenance() const { return provenance_; }

    double derivative(int k, double t) const;

protected:
    virtual double compute(int k, double t) const = 0;

private:
    std::string id_;
    Interval interval_;
    int max_order_;
    std::string provenance_;
};

// Deterministic per-process identifiers: prefix#n.
std::string next_leaf_id(const std::string& prefix);

} // namespace lodeq
