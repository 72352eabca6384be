#include "lodeq/parse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

namespace lodeq {

ParseError::ParseError(std::string code, const std::string& message, SourceSpan span)
    : Error(std::move(code), message + " (line " + std::to_string(span.line) + ", column " + std::to_string(span.column) + ")"),
      span_(span) {}

namespace {

const std::set<std::string> kFunctions = {"exp", "ln", "sin", "cos", "tan", "atan", "abs", "sqrt"};

Rational pow10(long n) {
    Integer p = 1;
    for (long i = 0; i < n; ++i)
        p *= 10;
    return Rational(p);
}

class ExprParser {
public:
    ExprParser(std::string_view text, const Bindings& bindings, SourceSpan base)
        : s_(text), bindings_(bindings), base_(base) {}

    Expression run() {
        skip();
        if (pos_ == s_.size())
            fail("empty_expression", "empty expression", pos_, pos_);
        Expression e = sum();
        skip();
        if (pos_ != s_.size())
            fail("syntax", std::string("unexpected '") + s_[pos_] + "'", pos_, pos_ + 1);
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& code, const std::string& msg, std::size_t b, std::size_t e) const {
        SourceSpan sp{base_.begin + b, base_.begin + std::max(b, e), base_.line, base_.column + static_cast<int>(b)};
        throw ParseError(code, msg, sp);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= s_.size())
                fail("syntax", std::string("expected '") + c + "' before end of input", pos_, pos_);
            fail("syntax", std::string("expected '") + c + "'", pos_, pos_ + 1);
        }
    }

    Expression sum() {
        Expression e = product();
        for (;;) {
            if (accept('+'))
                e = e + product();
            else if (accept('-'))
                e = e - product();
            else
                return e;
        }
    }

    Expression product() {
        Expression e = unary();
        for (;;) {
            if (accept('*'))
                e = e * unary();
            else if (accept('/')) {
                std::size_t at = pos_;
                Expression d = unary();
                if (d.is_zero())
                    fail("division_by_zero", "division by zero", at, pos_);
                e = e / d;
            } else
                return e;
        }
    }

    Expression unary() {
        if (accept('-'))
            return -unary();
        if (accept('+'))
            return unary();
        return power();
    }

    Expression power() {
        Expression base = primary();
        skip();
        if (!accept('^'))
            return base;
        std::size_t at = pos_;
        Expression ex = unary();
        if (ex.is_constant()) {
            if (base.is_zero() && ex.value() <= 0)
                fail("division_by_zero", "zero raised to a nonpositive power", at, pos_);
            return pow(base, ex.value());
        }
        if (base == exp(Expression(1)))
            return exp(ex);
        fail("nonconstant_exponent", "exponent must be a constant", at, pos_);
    }

    Expression number() {
        std::size_t b = pos_;
        Integer mant = 0;
        long frac = 0;
        bool digits = false;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            mant = mant * 10 + (s_[pos_++] - '0');
            digits = true;
        }
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                mant = mant * 10 + (s_[pos_++] - '0');
                ++frac;
                digits = true;
            }
        }
        if (!digits)
            fail("syntax", "malformed number", b, pos_);
        long ex = 0;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t q = pos_ + 1;
            int sign = 1;
            if (q < s_.size() && (s_[q] == '+' || s_[q] == '-')) {
                sign = s_[q] == '-' ? -1 : 1;
                ++q;
            }
            if (q < s_.size() && std::isdigit(static_cast<unsigned char>(s_[q]))) {
                long v = 0;
                while (q < s_.size() && std::isdigit(static_cast<unsigned char>(s_[q]))) {
                    v = v * 10 + (s_[q++] - '0');
                    if (v > 4000)
                        fail("syntax", "exponent out of range", b, q);
                }
                ex = sign * v;
                pos_ = q;
            }
        }
        Rational value(mant);
        long shift = ex - frac;
        if (shift >= 0)
            value *= pow10(shift);
        else
            value /= pow10(-shift);
        return Expression(value);
    }

    Expression primary() {
        skip();
        if (pos_ >= s_.size())
            fail("syntax", "unexpected end of input", pos_, pos_);
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (c == '(') {
            ++pos_;
            Expression e = sum();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t b = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string name(s_.substr(b, pos_ - b));
            if (kFunctions.count(name))
                return call(name, b);
            if (name == "t")
                return Expression::t();
            if (name == "e")
                return exp(Expression(1));
            if (name == "pi")
                return Expression(4) * atan(Expression(1));
            auto it = bindings_.find(name);
            if (it != bindings_.end())
                return Expression(it->second);
            fail("unknown_identifier", "unknown identifier '" + name + "'", b, pos_);
        }
        fail("syntax", std::string("unexpected '") + c + "'", pos_, pos_ + 1);
    }

    Expression call(const std::string& name, std::size_t b) {
        std::size_t name_end = pos_;
        if (!accept('('))
            fail("arity", name + " expects one argument", b, name_end);
        std::vector<Expression> args;
        skip();
        if (!accept(')')) {
            args.push_back(sum());
            while (accept(','))
                args.push_back(sum());
            expect(')');
        }
        if (args.size() != 1)
            fail("arity", name + " expects one argument, got " + std::to_string(args.size()), b, pos_);
        const Expression& a = args[0];
        try {
            if (name == "exp")
                return exp(a);
            if (name == "ln")
                return log(a);
            if (name == "sin")
                return sin(a);
            if (name == "cos")
                return cos(a);
            if (name == "tan")
                return tan(a);
            if (name == "atan")
                return atan(a);
            if (name == "abs")
                return abs(a);
            return sqrt(a);
        } catch (const Error& err) {
            fail(err.code(), err.what(), b, pos_);
        }
    }

    std::string_view s_;
    const Bindings& bindings_;
    SourceSpan base_;
    std::size_t pos_ = 0;
};

Expression parse_at(std::string_view text, const Bindings& bindings, SourceSpan base) {
    return ExprParser(text, bindings, base).run();
}

std::string_view trim(std::string_view s, std::size_t& offset) {
    std::size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    std::size_t e = s.size();
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    offset += b;
    return s.substr(b, e - b);
}

SourceSpan make_span(std::size_t line_begin, int line, std::size_t b, std::size_t e) {
    return SourceSpan{line_begin + b, line_begin + e, line, static_cast<int>(b) + 1};
}

bool valid_name(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    return true;
}

} // namespace

Expression parse_expression(std::string_view text, const Bindings& bindings) {
    return parse_at(text, bindings, SourceSpan{0, text.size(), 1, 1});
}

Document Document::parse(std::string_view text) {
    Document doc;
    std::size_t line_begin = 0;
    int line = 0;
    std::set<std::string> seen;
    while (line_begin <= text.size()) {
        ++line;
        std::size_t nl = text.find('\n', line_begin);
        std::size_t line_end = nl == std::string_view::npos ? text.size() : nl;
        std::string_view raw = text.substr(line_begin, line_end - line_begin);
        std::size_t hash = raw.find('#');
        if (hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        std::size_t off = 0;
        std::string_view body = trim(raw, off);
        if (!body.empty()) {
            std::size_t eq = body.find('=');
            if (eq == std::string_view::npos)
                throw ParseError("syntax", "expected 'key = value'", make_span(line_begin, line, off, off + body.size()));
            std::size_t koff = off;
            std::string_view key = trim(body.substr(0, eq), koff);
            std::size_t voff = off + eq + 1;
            std::string_view value = trim(body.substr(eq + 1), voff);
            SourceSpan kspan = make_span(line_begin, line, koff, koff + key.size());
            SourceSpan vspan = make_span(line_begin, line, voff, voff + value.size());
            if (value.empty())
                throw ParseError("syntax", "missing value", vspan);
            if (key.substr(0, 6) == "const ") {
                std::size_t noff = koff + 6;
                std::string_view name = trim(key.substr(6), noff);
                SourceSpan nspan = make_span(line_begin, line, noff, noff + name.size());
                if (!valid_name(name) || kFunctions.count(std::string(name)) || name == "t" || name == "e" || name == "pi")
                    throw ParseError("syntax", "invalid constant name", nspan);
                if (doc.bindings_.count(std::string(name)))
                    throw ParseError("duplicate_key", "constant '" + std::string(name) + "' bound twice", nspan);
                Expression v = parse_at(value, doc.bindings_, vspan);
                if (!v.is_constant())
                    throw ParseError("nonconstant_binding", "constant must have a rational value", vspan);
                doc.bindings_[std::string(name)] = v.value();
            } else {
                if (!valid_name(key))
                    throw ParseError("syntax", "invalid key", kspan);
                if (!seen.insert(std::string(key)).second)
                    throw ParseError("duplicate_key", "key '" + std::string(key) + "' given twice", kspan);
                doc.entries_.push_back(Entry{std::string(key), std::string(value), kspan, vspan});
            }
        }
        if (nl == std::string_view::npos)
            break;
        line_begin = nl + 1;
    }
    doc.end_ = SourceSpan{text.size(), text.size(), line, 1};
    return doc;
}

bool Document::has(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.key == key)
            return true;
    return false;
}

const Document::Entry& Document::get(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.key == key)
            return e;
    throw ParseError("missing_field", "missing field '" + key + "'", end_);
}

SourceSpan Document::span_of(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.key == key)
            return e.key_span;
    return end_;
}

void Document::require_keys(const std::vector<std::string>& allowed) const {
    for (const auto& e : entries_)
        if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end())
            throw ParseError("unknown_key", "unknown key '" + e.key + "'", e.key_span);
}

Expression Document::expression(const std::string& key) const {
    const Entry& e = get(key);
    return parse_at(e.value, bindings_, e.value_span);
}

long Document::integer(const std::string& key) const {
    const Entry& e = get(key);
    Expression v = parse_at(e.value, bindings_, e.value_span);
    if (!v.is_constant() || !is_integer(v.value()))
        throw ParseError("syntax", "'" + key + "' must be an integer", e.value_span);
    Integer n = numerator(v.value());
    if (n > 1000 || n < -1000)
        throw ParseError("syntax", "'" + key + "' out of range", e.value_span);
    return n.convert_to<long>();
}

Interval Document::interval(const std::string& key) const {
    const Entry& e = get(key);
    const std::string& v = e.value;
    auto sub = [&](std::size_t b, std::size_t n) {
        SourceSpan s = e.value_span;
        s.begin += b;
        s.end = s.begin + n;
        s.column += static_cast<int>(b);
        return s;
    };
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw ParseError("syntax", "interval must be written [lo, hi]", e.value_span);
    std::size_t comma = v.find(',');
    if (comma == std::string::npos || v.find(',', comma + 1) != std::string::npos)
        throw ParseError("syntax", "interval must have two endpoints", e.value_span);
    auto endpoint = [&](std::size_t b, std::size_t n) {
        SourceSpan s = sub(b, n);
        Expression x = parse_at(std::string_view(v).substr(b, n), bindings_, s);
        if (x.depends_on_t())
            throw ParseError("syntax", "interval endpoint depends on t", s);
        return evaluate(x, 0.0);
    };
    Interval I{endpoint(1, comma - 1), endpoint(comma + 1, v.size() - comma - 2)};
    if (!I.valid())
        throw ParseError("interval", "interval needs lo < hi", e.value_span);
    return I;
}

LinearODE parse_ode(std::string_view text) {
    Document doc = Document::parse(text);
    long r = doc.integer("order");
    if (r < 2)
        throw ParseError("order", "order must be at least 2", doc.get("order").value_span);
    std::vector<std::string> allowed = {"order", "b", "interval", "lead"};
    for (long m = 0; m < r; ++m)
        allowed.push_back("a" + std::to_string(m));
    for (const auto& e : doc.entries())
        if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end()) {
            bool coeff = e.key.size() > 1 && e.key[0] == 'a' &&
                         std::all_of(e.key.begin() + 1, e.key.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
            if (coeff)
                throw ParseError("coefficient_count", "coefficient " + e.key + " exceeds order " + std::to_string(r), e.key_span);
            throw ParseError("unknown_key", "unknown key '" + e.key + "'", e.key_span);
        }
    for (long m = 0; m < r; ++m)
        if (!doc.has("a" + std::to_string(m)))
            throw ParseError("coefficient_count", "order " + std::to_string(r) + " needs a0..a" + std::to_string(r - 1),
                             doc.span_of("a" + std::to_string(m)));
    if (doc.has("lead")) {
        Expression lead = doc.expression("lead");
        if (!lead.is_one())
            throw ParseError("nonmonic", "leading coefficient must be 1", doc.get("lead").value_span);
    }
    Interval I = doc.interval("interval");
    std::vector<Expression> coeffs;
    auto checked = [&](const std::string& key) {
        Expression c = doc.expression(key);
        try {
            double v = evaluate(c, I.mid());
            if (!std::isfinite(v))
                throw EvaluationError("nonfinite", "nonfinite value");
        } catch (const Error& err) {
            throw ParseError("unevaluable_coefficient", key + " does not evaluate on the interval: " + err.what(),
                             doc.get(key).value_span);
        }
        return c;
    };
    for (long m = 0; m < r; ++m)
        coeffs.push_back(checked("a" + std::to_string(m)));
    Expression b = doc.has("b") ? checked("b") : Expression(0);
    try {
        return LinearODE(std::move(coeffs), b, I);
    } catch (const Error& err) {
        throw ParseError(err.code(), err.what(), doc.span_of("order"));
    }
}

PointTransformation parse_transformation(std::string_view text) {
    Document doc = Document::parse(text);
    doc.require_keys({"T", "X1", "X0", "interval"});
    Expression T = doc.expression("T");
    Expression X1 = doc.expression("X1");
    Expression X0 = doc.has("X0") ? doc.expression("X0") : Expression(0);
    Interval I = doc.interval("interval");
    try {
        return PointTransformation(T, X1, X0, I);
    } catch (const Error& err) {
        std::string key = err.code() == "vanishing_x1" ? "X1" : "T";
        throw ParseError(err.code(), err.what(), doc.get(key).value_span);
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string write_interval(const Interval& I) { return "[" + format_double(I.lo) + ", " + format_double(I.hi) + "]"; }

std::string write_ode(const LinearODE& ode) {
    std::string s = "order = " + std::to_string(ode.order()) + "\n";
    for (int m = 0; m < ode.order(); ++m)
        s += "a" + std::to_string(m) + " = " + to_string(ode.coeff(m)) + "\n";
    s += "b = " + to_string(ode.rhs()) + "\n";
    s += "interval = " + write_interval(ode.interval()) + "\n";
    return s;
}

std::string write_transformation(const PointTransformation& tau) {
    return "T = " + to_string(tau.T()) + "\nX1 = " + to_string(tau.X1()) + "\nX0 = " + to_string(tau.X0()) +
           "\ninterval = " + write_interval(tau.source()) + "\n";
}

FundamentalSystem parse_system(std::string_view text) {
    Document doc = Document::parse(text);
    long r = doc.integer("order");
    if (r < 1)
        throw ParseError("order", "order must be at least 1", doc.get("order").value_span);
    std::vector<std::string> allowed = {"order", "interval"};
    for (long i = 1; i <= r; ++i)
        allowed.push_back("chi" + std::to_string(i));
    for (const auto& e : doc.entries())
        if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end()) {
            if (e.key.rfind("chi", 0) == 0)
                throw ParseError("function_count", "function " + e.key + " exceeds order " + std::to_string(r), e.key_span);
            throw ParseError("unknown_key", "unknown key '" + e.key + "'", e.key_span);
        }
    Interval I = doc.interval("interval");
    FundamentalSystem fs{{}, I};
    for (long i = 1; i <= r; ++i) {
        std::string key = "chi" + std::to_string(i);
        if (!doc.has(key))
            throw ParseError("function_count", "order " + std::to_string(r) + " needs chi1..chi" + std::to_string(r),
                             doc.span_of(key));
        Expression c = doc.expression(key);
        try {
            double v = evaluate(c, I.mid());
            if (!std::isfinite(v))
                throw EvaluationError("nonfinite", "nonfinite value");
        } catch (const Error& err) {
            throw ParseError("unevaluable_function", key + " does not evaluate on the interval: " + err.what(),
                             doc.get(key).value_span);
        }
        fs.chi.push_back(c);
    }
    return fs;
}

std::string write_system(const FundamentalSystem& fs) {
    std::string s = "order = " + std::to_string(fs.order()) + "\n";
    for (int i = 0; i < fs.order(); ++i)
        s += "chi" + std::to_string(i + 1) + " = " + to_string(fs.chi[static_cast<std::size_t>(i)]) + "\n";
    s += "interval = " + write_interval(fs.interval) + "\n";
    return s;
}

} // namespace lodeq
