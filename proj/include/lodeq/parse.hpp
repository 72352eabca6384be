#pragma once

#include "lodeq/error.hpp"
#include "lodeq/expr.hpp"
#include "lodeq/ode.hpp"
#include "lodeq/reparam.hpp"
#include "lodeq/transform.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lodeq {

struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    int line = 1;
    int column = 1;
};

class ParseError : public Error {
public:
    ParseError(std::string code, const std::string& message, SourceSpan span);
    const SourceSpan& span() const noexcept { return span_; }

private:
    SourceSpan span_;
};

// Named constants substituted during parsing (meta-parameters such as c0).
using Bindings = std::map<std::string, Rational>;

Expression parse_expression(std::string_view text, const Bindings& bindings = {});

// Line-oriented `key = value` document with `#` comments and `const name = value` bindings.
class Document {
public:
    struct Entry {
        std::string key;
        std::string value;
        SourceSpan key_span;
        SourceSpan value_span;
    };

    static Document parse(std::string_view text);

    bool has(const std::string& key) const;
    const Entry& get(const std::string& key) const;
    const std::vector<Entry>& entries() const { return entries_; }
    const Bindings& bindings() const { return bindings_; }

    Expression expression(const std::string& key) const;
    Interval interval(const std::string& key) const;
    long integer(const std::string& key) const;
    // Span of a key line, or of the end of the document when absent.
    SourceSpan span_of(const std::string& key) const;
    // Fails with unknown_key on any key outside the allowed set.
    void require_keys(const std::vector<std::string>& allowed) const;

private:
    std::vector<Entry> entries_;
    Bindings bindings_;
    SourceSpan end_;
};

LinearODE parse_ode(std::string_view text);
PointTransformation parse_transformation(std::string_view text);
// order = r, chi1 .. chir, interval.
FundamentalSystem parse_system(std::string_view text);

std::string format_double(double v);
std::string write_interval(const Interval& I);
std::string write_ode(const LinearODE& ode);
std::string write_transformation(const PointTransformation& tau);
std::string write_system(const FundamentalSystem& fs);

} // namespace lodeq
