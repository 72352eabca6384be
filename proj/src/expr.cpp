#include "lodeq/expr.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace lodeq {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t hash_rational(const Rational& q) {
    return std::hash<double>{}(to_double(q)) * 31 + (is_integer(q) ? 7 : 11);
}

std::shared_ptr<Node> blank(Kind k) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    return n;
}

Expression finish(std::shared_ptr<Node> n) {
    std::size_t h = static_cast<std::size_t>(n->kind) * 0x100000001b3ULL + 1469598103934665603ULL;
    bool closed = true;
    bool has_t = false;
    switch (n->kind) {
    case Kind::Constant:
        h = mix(h, hash_rational(n->q));
        n->dval = to_double(n->q);
        break;
    case Kind::Variable:
        has_t = true;
        break;
    case Kind::Power:
        h = mix(h, hash_rational(n->q));
        break;
    case Kind::Leaf:
        h = mix(h, std::hash<std::string>{}(n->leaf->id()));
        h = mix(h, static_cast<std::size_t>(n->order));
        closed = false;
        break;
    case Kind::Inverse:
        closed = false;
        break;
    default:
        break;
    }
    for (const auto& a : n->args) {
        h = mix(h, a.hash());
        closed = closed && a.is_closed_form();
        has_t = has_t || a.depends_on_t();
    }
    // The inverse node's own argument decides whether it depends on t.
    if (n->kind == Kind::Inverse)
        has_t = n->args[1].depends_on_t();
    n->hash = h;
    n->closed = closed;
    n->has_t = has_t;
    return Expression(std::shared_ptr<const Node>(std::move(n)));
}

Expression constant(const Rational& q) {
    auto n = blank(Kind::Constant);
    n->q = q;
    return finish(std::move(n));
}

Expression raw(Kind k, std::vector<Expression> args) {
    auto n = blank(k);
    n->args = std::move(args);
    return finish(std::move(n));
}

Expression raw_power(const Expression& base, const Rational& e) {
    auto n = blank(Kind::Power);
    n->args = {base};
    n->q = e;
    return finish(std::move(n));
}

const Expression& zero_expr() {
    static const Expression z = constant(0);
    return z;
}

const Expression& one_expr() {
    static const Expression o = constant(1);
    return o;
}

bool deep_equal(const Node* a, const Node* b);

bool deep_equal_expr(const Expression& a, const Expression& b) {
    return a.node() == b.node() || deep_equal(a.node(), b.node());
}

bool deep_equal(const Node* a, const Node* b) {
    if (a == b)
        return true;
    if (a->hash != b->hash || a->kind != b->kind)
        return false;
    switch (a->kind) {
    case Kind::Constant:
        return a->q == b->q;
    case Kind::Variable:
        return true;
    case Kind::Power:
        if (a->q != b->q)
            return false;
        break;
    case Kind::Leaf:
        if (a->leaf != b->leaf || a->order != b->order)
            return false;
        break;
    case Kind::Inverse:
        if (!(a->domain == b->domain))
            return false;
        break;
    default:
        break;
    }
    if (a->args.size() != b->args.size())
        return false;
    for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!deep_equal_expr(a->args[i], b->args[i]))
            return false;
    return true;
}

int cmp_rational(const Rational& a, const Rational& b) { return a < b ? -1 : (b < a ? 1 : 0); }

} // namespace

// ---------------------------------------------------------------------------
// Expression accessors

Expression::Expression() : p_(zero_expr().p_) {}
Expression::Expression(int v) : p_(v == 0 ? zero_expr().p_ : (v == 1 ? one_expr().p_ : constant(v).p_)) {}
Expression::Expression(const Rational& v) : p_(constant(v).p_) {}

Expression Expression::t() {
    static const Expression var = raw(Kind::Variable, {});
    return var;
}

Kind Expression::kind() const { return p_->kind; }
const Rational& Expression::value() const { return p_->q; }
const Rational& Expression::exponent() const { return p_->q; }
const std::vector<Expression>& Expression::args() const { return p_->args; }
const Expression& Expression::arg(std::size_t i) const { return p_->args.at(i); }
const std::shared_ptr<const NumericLeaf>& Expression::leaf() const { return p_->leaf; }
int Expression::order() const { return p_->order; }
const Interval& Expression::domain() const { return p_->domain; }
Expression Expression::inverse_derivative() const { return Expression(p_->aux); }
std::size_t Expression::hash() const { return p_->hash; }
bool Expression::is_constant() const { return p_->kind == Kind::Constant; }
bool Expression::is_zero() const { return p_->kind == Kind::Constant && p_->q == 0; }
bool Expression::is_one() const { return p_->kind == Kind::Constant && p_->q == 1; }
bool Expression::depends_on_t() const { return p_->has_t; }
bool Expression::is_closed_form() const { return p_->closed; }

bool operator==(const Expression& a, const Expression& b) { return deep_equal_expr(a, b); }

int compare(const Expression& a, const Expression& b) {
    if (a.node() == b.node())
        return 0;
    if (a.kind() != b.kind())
        return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
    if (a.kind() == Kind::Constant)
        return cmp_rational(a.value(), b.value());
    if (a.hash() != b.hash())
        return a.hash() < b.hash() ? -1 : 1;
    switch (a.kind()) {
    case Kind::Power:
        if (int c = cmp_rational(a.exponent(), b.exponent()))
            return c;
        break;
    case Kind::Leaf:
        if (a.leaf()->id() != b.leaf()->id())
            return a.leaf()->id() < b.leaf()->id() ? -1 : 1;
        if (a.order() != b.order())
            return a.order() < b.order() ? -1 : 1;
        break;
    case Kind::Inverse:
        if (a.domain().lo != b.domain().lo)
            return a.domain().lo < b.domain().lo ? -1 : 1;
        if (a.domain().hi != b.domain().hi)
            return a.domain().hi < b.domain().hi ? -1 : 1;
        break;
    default:
        break;
    }
    const auto& x = a.args();
    const auto& y = b.args();
    std::size_t n = std::min(x.size(), y.size());
    for (std::size_t i = 0; i < n; ++i)
        if (int c = compare(x[i], y[i]))
            return c;
    if (x.size() != y.size())
        return x.size() < y.size() ? -1 : 1;
    return 0;
}

namespace {

void canonical_sort(std::vector<Expression>& v) {
    std::sort(v.begin(), v.end(), [](const Expression& a, const Expression& b) { return compare(a, b) < 0; });
}

// Grouping table keyed by structural equality.
template <class Value>
class Groups {
public:
    Value& at(const Expression& key, const Value& init) {
        auto range = index_.equal_range(key.hash());
        for (auto it = range.first; it != range.second; ++it)
            if (entries_[it->second].first == key)
                return entries_[it->second].second;
        index_.emplace(key.hash(), entries_.size());
        entries_.emplace_back(key, init);
        return entries_.back().second;
    }
    std::vector<std::pair<Expression, Value>>& entries() { return entries_; }

private:
    std::vector<std::pair<Expression, Value>> entries_;
    std::unordered_multimap<std::size_t, std::size_t> index_;
};

// Splits c*rest with c rational.
void split_coefficient(const Expression& term, Rational& c, Expression& rest) {
    if (term.kind() == Kind::Product && term.arg(0).is_constant()) {
        c = term.arg(0).value();
        std::vector<Expression> others(term.args().begin() + 1, term.args().end());
        rest = others.size() == 1 ? others[0] : raw(Kind::Product, std::move(others));
        return;
    }
    c = 1;
    rest = term;
}

Expression scale(const Rational& c, const Expression& rest) {
    if (c == 1)
        return rest;
    std::vector<Expression> f{constant(c)};
    if (rest.kind() == Kind::Product)
        f.insert(f.end(), rest.args().begin(), rest.args().end());
    else
        f.push_back(rest);
    return raw(Kind::Product, std::move(f));
}

void flatten_sum(const Expression& e, std::vector<Expression>& out) {
    if (e.kind() == Kind::Sum)
        for (const auto& a : e.args())
            flatten_sum(a, out);
    else
        out.push_back(e);
}

} // namespace

Expression make_sum(std::vector<Expression> terms) {
    std::vector<Expression> flat;
    for (const auto& t : terms)
        flatten_sum(t, flat);
    Rational constant_part = 0;
    Groups<Rational> groups;
    for (const auto& t : flat) {
        if (t.is_constant()) {
            constant_part += t.value();
            continue;
        }
        Rational c;
        Expression rest;
        split_coefficient(t, c, rest);
        groups.at(rest, Rational(0)) += c;
    }
    std::vector<Expression> out;
    for (auto& [rest, c] : groups.entries())
        if (c != 0)
            out.push_back(scale(c, rest));
    if (constant_part != 0)
        out.push_back(constant(constant_part));
    if (out.empty())
        return zero_expr();
    if (out.size() == 1)
        return out[0];
    canonical_sort(out);
    return raw(Kind::Sum, std::move(out));
}

Expression make_product(std::vector<Expression> factors) {
    Rational c = 1;
    Groups<Rational> groups;
    std::vector<Expression> exp_args;
    std::vector<Expression> work(factors.rbegin(), factors.rend());
    for (;;) {
        while (!work.empty()) {
            Expression f = work.back();
            work.pop_back();
            switch (f.kind()) {
            case Kind::Product:
                for (auto it = f.args().rbegin(); it != f.args().rend(); ++it)
                    work.push_back(*it);
                break;
            case Kind::Constant:
                c *= f.value();
                break;
            case Kind::Exp:
                exp_args.push_back(f.arg());
                break;
            case Kind::Power:
                groups.at(f.arg(), Rational(0)) += f.exponent();
                break;
            default:
                groups.at(f, Rational(0)) += 1;
                break;
            }
        }
        if (exp_args.size() <= 1)
            break;
        Expression combined = exp(make_sum(exp_args));
        exp_args.clear();
        if (combined.kind() == Kind::Exp)
            exp_args.push_back(combined.arg());
        else
            work.push_back(combined);
        if (work.empty())
            break;
    }
    if (c == 0)
        return zero_expr();
    std::vector<Expression> out;
    for (auto& [base, e] : groups.entries()) {
        if (e == 0)
            continue;
        Expression p = pow(base, e);
        if (p.is_constant())
            c *= p.value();
        else if (p.kind() == Kind::Product) {
            for (const auto& a : p.args()) {
                if (a.is_constant())
                    c *= a.value();
                else
                    out.push_back(a);
            }
        } else
            out.push_back(p);
    }
    for (const auto& a : exp_args)
        out.push_back(raw(Kind::Exp, {a}));
    if (c == 0)
        return zero_expr();
    if (out.empty())
        return constant(c);
    if (out.size() == 1) {
        if (c == 1)
            return out[0];
        if (out[0].kind() == Kind::Sum) {
            std::vector<Expression> terms;
            for (const auto& t : out[0].args())
                terms.push_back(make_product({constant(c), t}));
            return make_sum(std::move(terms));
        }
    }
    canonical_sort(out);
    if (c != 1)
        out.insert(out.begin(), constant(c));
    return raw(Kind::Product, std::move(out));
}

Expression pow(const Expression& base, const Rational& e) {
    if (e == 0)
        return one_expr();
    if (e == 1)
        return base;
    switch (base.kind()) {
    case Kind::Constant: {
        const Rational& v = base.value();
        if (v == 1)
            return one_expr();
        if (v == 0)
            return e > 0 ? zero_expr() : raw_power(base, e);
        if (is_integer(e))
            return constant(rational_pow(v, static_cast<long>(numerator(e))));
        Rational root;
        long den = static_cast<long>(denominator(e));
        if ((v > 0 || den % 2 == 1) && exact_root(v, den, root))
            return constant(rational_pow(root, static_cast<long>(numerator(e))));
        return raw_power(base, e);
    }
    case Kind::Power:
        if (denominator(e) % 2 == 1)
            return pow(base.arg(), base.exponent() * e);
        return raw_power(base, e);
    case Kind::Product:
        if (is_integer(e)) {
            std::vector<Expression> f;
            for (const auto& a : base.args())
                f.push_back(pow(a, e));
            return make_product(std::move(f));
        }
        return raw_power(base, e);
    case Kind::Exp:
        return exp(make_product({constant(e), base.arg()}));
    case Kind::Abs:
        if (is_integer(e) && numerator(e) % 2 == 0)
            return pow(base.arg(), e);
        return raw_power(base, e);
    default:
        return raw_power(base, e);
    }
}

Expression sqrt(const Expression& u) { return pow(u, Rational(1, 2)); }

Expression exp(const Expression& u) {
    if (u.is_zero())
        return one_expr();
    if (u.kind() == Kind::Log)
        return u.arg();
    return raw(Kind::Exp, {u});
}

Expression log(const Expression& u) {
    if (u.is_one())
        return zero_expr();
    if (u.kind() == Kind::Exp)
        return u.arg();
    return raw(Kind::Log, {u});
}

Expression sin(const Expression& u) { return u.is_zero() ? zero_expr() : raw(Kind::Sin, {u}); }
Expression cos(const Expression& u) { return u.is_zero() ? one_expr() : raw(Kind::Cos, {u}); }
Expression tan(const Expression& u) { return u.is_zero() ? zero_expr() : raw(Kind::Tan, {u}); }
Expression atan(const Expression& u) { return u.is_zero() ? zero_expr() : raw(Kind::Atan, {u}); }

Expression abs(const Expression& u) {
    switch (u.kind()) {
    case Kind::Constant:
        return constant(u.value() < 0 ? Rational(-u.value()) : u.value());
    case Kind::Exp:
    case Kind::Abs:
        return u;
    case Kind::Power:
        if (is_integer(u.exponent()) && numerator(u.exponent()) % 2 == 0)
            return u;
        return raw(Kind::Abs, {u});
    case Kind::Product:
        if (u.arg(0).is_constant()) {
            std::vector<Expression> rest(u.args().begin() + 1, u.args().end());
            Rational c = u.arg(0).value();
            return make_product({constant(c < 0 ? Rational(-c) : c), abs(make_product(std::move(rest)))});
        }
        return raw(Kind::Abs, {u});
    default:
        return raw(Kind::Abs, {u});
    }
}

Expression operator+(const Expression& a, const Expression& b) { return make_sum({a, b}); }
Expression operator-(const Expression& a, const Expression& b) { return make_sum({a, -b}); }
Expression operator*(const Expression& a, const Expression& b) { return make_product({a, b}); }
Expression operator/(const Expression& a, const Expression& b) { return make_product({a, pow(b, -1)}); }
Expression operator-(const Expression& a) { return make_product({constant(-1), a}); }

Expression make_leaf(std::shared_ptr<const NumericLeaf> leaf, int order, const Expression& arg) {
    if (!leaf)
        throw InvalidArgument("invalid_leaf", "null numeric leaf");
    if (order < 0 || order > leaf->max_order())
        throw DomainError("derivative_order", "derivative order " + std::to_string(order) + " exceeds declared order " +
                                                  std::to_string(leaf->max_order()) + " of leaf " + leaf->id());
    auto n = blank(Kind::Leaf);
    n->leaf = std::move(leaf);
    n->order = order;
    n->args = {arg};
    return finish(std::move(n));
}

Expression make_inverse(const Expression& f, const Interval& domain, const Expression& arg) {
    if (arg == f)
        return Expression::t();
    if (f.kind() == Kind::Variable)
        return arg;
    auto n = blank(Kind::Inverse);
    n->args = {f, arg};
    n->domain = domain;
    n->aux = differentiate(f).shared();
    return finish(std::move(n));
}

// ---------------------------------------------------------------------------
// Differentiation and substitution

namespace {

class Differentiator {
public:
    Expression d(const Expression& e) {
        if (!e.depends_on_t())
            return zero_expr();
        auto it = memo_.find(e.node());
        if (it != memo_.end())
            return it->second;
        Expression r = compute(e);
        memo_.emplace(e.node(), r);
        return r;
    }

private:
    Expression compute(const Expression& e) {
        switch (e.kind()) {
        case Kind::Constant:
            return zero_expr();
        case Kind::Variable:
            return one_expr();
        case Kind::Sum: {
            std::vector<Expression> terms;
            for (const auto& a : e.args())
                terms.push_back(d(a));
            return make_sum(std::move(terms));
        }
        case Kind::Product: {
            std::vector<Expression> terms;
            const auto& f = e.args();
            for (std::size_t i = 0; i < f.size(); ++i) {
                Expression di = d(f[i]);
                if (di.is_zero())
                    continue;
                std::vector<Expression> prod;
                for (std::size_t j = 0; j < f.size(); ++j)
                    prod.push_back(j == i ? di : f[j]);
                terms.push_back(make_product(std::move(prod)));
            }
            return make_sum(std::move(terms));
        }
        case Kind::Power: {
            const Rational& p = e.exponent();
            return make_product({constant(p), pow(e.arg(), p - 1), d(e.arg())});
        }
        case Kind::Exp:
            return make_product({e, d(e.arg())});
        case Kind::Log:
            return make_product({d(e.arg()), pow(e.arg(), -1)});
        case Kind::Sin:
            return make_product({cos(e.arg()), d(e.arg())});
        case Kind::Cos:
            return make_product({constant(-1), sin(e.arg()), d(e.arg())});
        case Kind::Tan:
            return make_product({make_sum({one_expr(), pow(e, 2)}), d(e.arg())});
        case Kind::Atan:
            return make_product({d(e.arg()), pow(make_sum({one_expr(), pow(e.arg(), 2)}), -1)});
        case Kind::Abs:
            return make_product({e.arg(), pow(e, -1), d(e.arg())});
        case Kind::Leaf:
            return make_product({make_leaf(e.leaf(), e.order() + 1, e.arg()), d(e.arg())});
        case Kind::Inverse: {
            Expression fp_at = substitute(e.inverse_derivative(), e);
            return make_product({pow(fp_at, -1), d(e.arg(1))});
        }
        }
        return zero_expr();
    }

    std::unordered_map<const Node*, Expression> memo_;
};

class Rebuilder {
public:
    explicit Rebuilder(std::function<Expression(const Expression&)> on_variable) : on_var_(std::move(on_variable)) {}

    Expression run(const Expression& e) {
        auto it = memo_.find(e.node());
        if (it != memo_.end())
            return it->second;
        Expression r = compute(e);
        memo_.emplace(e.node(), r);
        return r;
    }

private:
    Expression compute(const Expression& e) {
        switch (e.kind()) {
        case Kind::Constant:
            return e;
        case Kind::Variable:
            return on_var_(e);
        case Kind::Sum: {
            std::vector<Expression> a;
            for (const auto& x : e.args())
                a.push_back(run(x));
            return make_sum(std::move(a));
        }
        case Kind::Product: {
            std::vector<Expression> a;
            for (const auto& x : e.args())
                a.push_back(run(x));
            return make_product(std::move(a));
        }
        case Kind::Power:
            return pow(run(e.arg()), e.exponent());
        case Kind::Exp:
            return exp(run(e.arg()));
        case Kind::Log:
            return log(run(e.arg()));
        case Kind::Sin:
            return sin(run(e.arg()));
        case Kind::Cos:
            return cos(run(e.arg()));
        case Kind::Tan:
            return tan(run(e.arg()));
        case Kind::Atan:
            return atan(run(e.arg()));
        case Kind::Abs:
            return abs(run(e.arg()));
        case Kind::Leaf:
            return make_leaf(e.leaf(), e.order(), run(e.arg()));
        case Kind::Inverse:
            return make_inverse(e.arg(0), e.domain(), run(e.arg(1)));
        }
        return e;
    }

    std::function<Expression(const Expression&)> on_var_;
    std::unordered_map<const Node*, Expression> memo_;
};

} // namespace

Expression differentiate(const Expression& e, int k) {
    if (k < 0)
        throw InvalidArgument("invalid_order", "negative derivative order");
    Expression r = e;
    for (int i = 0; i < k; ++i) {
        Differentiator d;
        r = d.d(r);
    }
    return r;
}

Expression substitute(const Expression& e, const Expression& value) {
    if (value.kind() == Kind::Variable)
        return e;
    Rebuilder rb([&](const Expression&) { return value; });
    return rb.run(e);
}

Expression normalize(const Expression& e) {
    Rebuilder rb([](const Expression& v) { return v; });
    return rb.run(e);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double real_power(double x, const Rational& e) {
    if (is_integer(e)) {
        if (x == 0.0 && e < 0)
            throw EvaluationError("singular_point", "division by zero");
        return std::pow(x, to_double(e));
    }
    long den = static_cast<long>(denominator(e));
    if (x < 0.0) {
        if (den % 2 == 0)
            throw EvaluationError("singular_point", "even root of a negative number");
        double mag = std::pow(-x, to_double(e));
        long num = static_cast<long>(numerator(e));
        return (num % 2 == 0) ? mag : -mag;
    }
    if (x == 0.0 && e < 0)
        throw EvaluationError("singular_point", "division by zero");
    return std::pow(x, to_double(e));
}

double checked(double v, const char* what) {
    if (!std::isfinite(v))
        throw EvaluationError("singular_point", std::string("non-finite value in ") + what);
    return v;
}

double solve_inverse(const Node* n, double s) {
    const Expression& f = n->args[0];
    const Expression fp(n->aux);
    double lo = n->domain.lo;
    double hi = n->domain.hi;
    double flo = evaluate(f, lo);
    double fhi = evaluate(f, hi);
    double sgn = fhi >= flo ? 1.0 : -1.0;
    double fmin = std::min(flo, fhi);
    double fmax = std::max(flo, fhi);
    double slack = 1e-9 * std::max({1.0, std::abs(flo), std::abs(fhi)});
    if (!(s >= fmin - slack && s <= fmax + slack))
        throw DomainError("out_of_interval", "argument outside the range of the inverted function");
    if (s <= fmin)
        return sgn > 0 ? lo : hi;
    if (s >= fmax)
        return sgn > 0 ? hi : lo;
    double a = lo;
    double b = hi;
    double x = lo + (s - flo) / (fhi - flo) * (hi - lo);
    for (int iter = 0; iter < 200; ++iter) {
        double g = (evaluate(f, x) - s) * sgn;
        if (g == 0.0)
            return x;
        if (g < 0.0)
            a = x;
        else
            b = x;
        double dg = evaluate(fp, x) * sgn;
        double xn = x - g / dg;
        if (!(xn > a && xn < b) || !std::isfinite(xn))
            xn = 0.5 * (a + b);
        double tolx = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
        if (std::abs(xn - x) <= tolx || b - a <= tolx)
            return xn;
        x = xn;
    }
    return x;
}

} // namespace

double Evaluator::operator()(const Expression& e) { return eval(e.node()); }

double Evaluator::eval(const Node* n) {
    switch (n->kind) {
    case Kind::Constant:
        return n->dval;
    case Kind::Variable:
        return t_;
    default:
        break;
    }
    auto it = memo_.find(n);
    if (it != memo_.end())
        return it->second;
    double v = 0.0;
    switch (n->kind) {
    case Kind::Sum:
        for (const auto& a : n->args)
            v += eval(a.node());
        break;
    case Kind::Product:
        v = 1.0;
        for (const auto& a : n->args)
            v *= eval(a.node());
        break;
    case Kind::Power:
        v = real_power(eval(n->args[0].node()), n->q);
        break;
    case Kind::Exp:
        v = std::exp(eval(n->args[0].node()));
        break;
    case Kind::Log: {
        double x = eval(n->args[0].node());
        if (!(x > 0.0))
            throw EvaluationError("singular_point", "logarithm of a non-positive number");
        v = std::log(x);
        break;
    }
    case Kind::Sin:
        v = std::sin(eval(n->args[0].node()));
        break;
    case Kind::Cos:
        v = std::cos(eval(n->args[0].node()));
        break;
    case Kind::Tan: {
        double x = eval(n->args[0].node());
        if (std::abs(std::cos(x)) < 1e-300)
            throw EvaluationError("singular_point", "tangent pole");
        v = std::tan(x);
        break;
    }
    case Kind::Atan:
        v = std::atan(eval(n->args[0].node()));
        break;
    case Kind::Abs:
        v = std::abs(eval(n->args[0].node()));
        break;
    case Kind::Leaf:
        v = n->leaf->derivative(n->order, eval(n->args[0].node()));
        break;
    case Kind::Inverse:
        v = solve_inverse(n, eval(n->args[1].node()));
        break;
    default:
        break;
    }
    checked(v, "evaluation");
    memo_.emplace(n, v);
    return v;
}

double evaluate(const Expression& e, double t) {
    Evaluator ev(t);
    return ev(e);
}

std::vector<double> evaluate_many(std::span<const Expression> es, double t) {
    Evaluator ev(t);
    std::vector<double> out;
    out.reserve(es.size());
    for (const auto& e : es)
        out.push_back(ev(e));
    return out;
}

std::vector<double> chebyshev_nodes(const Interval& I, int n) {
    std::vector<double> out;
    out.reserve(n);
    double mid = I.mid();
    double half = 0.5 * I.length();
    for (int i = n - 1; i >= 0; --i)
        out.push_back(mid + half * std::cos((2.0 * i + 1.0) * std::numbers::pi / (2.0 * n)));
    return out;
}

namespace {

// Evaluates f at t, falling back to nearby points inside I.
template <class F>
auto with_jitter(const Interval& I, double t, F&& f) -> decltype(f(t)) {
    double step = 1e-6 * I.length();
    for (int k = 0;; ++k) {
        double s = t;
        if (k > 0) {
            int m = (k + 1) / 2;
            s = t + ((k % 2) ? m : -m) * step;
            if (s < I.lo || s > I.hi)
                s = t - ((k % 2) ? m : -m) * step;
        }
        try {
            return f(s);
        } catch (const Error&) {
            if (k >= 8)
                throw;
        }
    }
}

} // namespace

EquivReport equiv_report(const Expression& e1, const Expression& e2, const Interval& I, int n, double tol) {
    if (n < 8)
        throw InvalidArgument("too_few_samples", "equivalence check needs at least 8 samples");
    EquivReport rep;
    for (double t : chebyshev_nodes(I, n)) {
        auto [v1, v2, at] = with_jitter(I, t, [&](double s) {
            Evaluator ev(s);
            double a = ev(e1);
            double b = ev(e2);
            return std::tuple<double, double, double>(a, b, s);
        });
        double dev = std::abs(v1 - v2);
        double bound = tol * (1.0 + std::abs(v1));
        double rel = dev / (1.0 + std::abs(v1));
        if (rel > rep.max_deviation) {
            rep.max_deviation = rel;
            rep.worst_t = at;
        }
        if (!(dev <= bound))
            rep.equal = false;
    }
    return rep;
}

bool equiv_numeric(const Expression& e1, const Expression& e2, const Interval& I, int n, double tol) {
    return equiv_report(e1, e2, I, n, tol).equal;
}

double sup_norm(const Expression& e, const Interval& I, int n) {
    double m = 0.0;
    for (double t : chebyshev_nodes(I, n))
        m = std::max(m, std::abs(with_jitter(I, t, [&](double s) { return evaluate(e, s); })));
    return m;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Degree of c*t^n, or -1 when the term is not a monomial.
long monomial_degree(const Expression& e) {
    switch (e.kind()) {
    case Kind::Constant:
        return 0;
    case Kind::Variable:
        return 1;
    case Kind::Power:
        if (e.arg().kind() == Kind::Variable && is_integer(e.exponent()) && e.exponent() > 0)
            return static_cast<long>(numerator(e.exponent()));
        return -1;
    case Kind::Product:
        if (e.args().size() == 2 && e.arg(0).is_constant())
            return monomial_degree(e.arg(1)) > 0 ? monomial_degree(e.arg(1)) : -1;
        return -1;
    default:
        return -1;
    }
}

bool negative_term(const Expression& e) {
    if (e.is_constant())
        return e.value() < 0;
    return e.kind() == Kind::Product && e.arg(0).is_constant() && e.arg(0).value() < 0;
}

std::string print(const Expression& e);

std::string print_base(const Expression& b) {
    switch (b.kind()) {
    case Kind::Constant:
        if (b.value() < 0 || !is_integer(b.value()))
            return "(" + to_string(b.value()) + ")";
        return to_string(b.value());
    case Kind::Sum:
    case Kind::Product:
    case Kind::Power:
        return "(" + print(b) + ")";
    default:
        return print(b);
    }
}

std::string print_exponent(const Rational& p) {
    if (is_integer(p) && p > 0)
        return to_string(p);
    return "(" + to_string(p) + ")";
}

std::string print_factor(const Expression& f) {
    if (f.kind() == Kind::Sum)
        return "(" + print(f) + ")";
    return print(f);
}

std::string print_product(const Expression& e) {
    Rational c = 1;
    std::vector<std::string> num;
    std::vector<std::string> den;
    for (const auto& f : e.args()) {
        if (f.is_constant()) {
            c = f.value();
            continue;
        }
        if (f.kind() == Kind::Power && is_integer(f.exponent()) && f.exponent() < 0) {
            Rational p = -f.exponent();
            den.push_back(p == 1 ? print_factor(f.arg()) : print_base(f.arg()) + "^" + print_exponent(p));
        } else
            num.push_back(print_factor(f));
    }
    std::string s;
    if (c == -1)
        s = "-";
    else if (c != 1)
        s = to_string(c) + (num.empty() ? "" : "*");
    if (num.empty())
        s += (c == 1 || c == -1) ? "1" : "";
    for (std::size_t i = 0; i < num.size(); ++i)
        s += (i ? "*" : "") + num[i];
    for (const auto& d : den)
        s += "/" + d;
    return s;
}

std::string print_sum(const Expression& e) {
    std::vector<Expression> terms = e.args();
    std::stable_sort(terms.begin(), terms.end(), [](const Expression& a, const Expression& b) {
        auto key = [](const Expression& x) {
            if (x.is_constant())
                return -2L;
            long d = monomial_degree(x);
            return d > 0 ? d : -1L;
        };
        return key(a) > key(b);
    });
    std::string s;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& t = terms[i];
        if (i == 0) {
            s = print(t);
            continue;
        }
        if (negative_term(t))
            s += " - " + print(-t);
        else
            s += " + " + print(t);
    }
    return s;
}

const char* function_name(Kind k) {
    switch (k) {
    case Kind::Exp:
        return "exp";
    case Kind::Log:
        return "ln";
    case Kind::Sin:
        return "sin";
    case Kind::Cos:
        return "cos";
    case Kind::Tan:
        return "tan";
    case Kind::Atan:
        return "atan";
    case Kind::Abs:
        return "abs";
    default:
        return "?";
    }
}

std::string print(const Expression& e) {
    switch (e.kind()) {
    case Kind::Constant:
        return to_string(e.value());
    case Kind::Variable:
        return "t";
    case Kind::Sum:
        return print_sum(e);
    case Kind::Product:
        return print_product(e);
    case Kind::Power:
        if (e.exponent() == -1)
            return "1/" + print_factor(e.arg());
        if (is_integer(e.exponent()) && e.exponent() < 0)
            return "1/" + print_base(e.arg()) + "^" + print_exponent(-e.exponent());
        return print_base(e.arg()) + "^" + print_exponent(e.exponent());
    case Kind::Leaf:
        return "{" + e.leaf()->id() + "}[" + std::to_string(e.order()) + "](" + print(e.arg()) + ")";
    case Kind::Inverse:
        return "inverse[" + print(e.arg(0)) + "](" + print(e.arg(1)) + ")";
    default:
        return std::string(function_name(e.kind())) + "(" + print(e.arg()) + ")";
    }
}

} // namespace

std::string to_string(const Expression& e) { return print(e); }

// ---------------------------------------------------------------------------
// Numeric leaves

NumericLeaf::NumericLeaf(std::string id, Interval interval, int max_order, std::string provenance)
    : id_(std::move(id)), interval_(interval), max_order_(max_order), provenance_(std::move(provenance)) {}

double NumericLeaf::derivative(int k, double t) const {
    if (k < 0 || k > max_order_)
        throw DomainError("derivative_order", "derivative order " + std::to_string(k) + " exceeds declared order of " + id_);
    double slack = 1e-9 * std::max({1.0, std::abs(interval_.lo), std::abs(interval_.hi)});
    if (!interval_.contains(t, slack))
        throw DomainError("out_of_interval", "leaf " + id_ + " evaluated outside its interval");
    t = std::clamp(t, interval_.lo, interval_.hi);
    return compute(k, t);
}

std::string next_leaf_id(const std::string& prefix) {
    static std::mutex m;
    static std::map<std::string, long> counters;
    std::lock_guard<std::mutex> lock(m);
    return prefix + "#" + std::to_string(++counters[prefix]);
}

} // namespace lodeq
