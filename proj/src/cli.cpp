#include "lodeq/cli.hpp"

#include "lodeq/gauge.hpp"
#include "lodeq/groupoid.hpp"
#include "lodeq/parse.hpp"
#include "lodeq/reparam.hpp"
#include "lodeq/symmetry.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

namespace lodeq::cli {

namespace {

constexpr int kNumericSamples = 5;

struct Globals {
    double tol = 1e-7;
    int samples = 50;
    std::string format = "text";
};

class Emitter {
public:
    explicit Emitter(RunReport& report) : report_(report) {}

    void put(const std::string& key, const std::string& value) { report_.outputs.push_back({key, value}); }
    void put(const std::string& key, double v) { put(key, format_double(v)); }
    void put(const std::string& key, bool v) { put(key, std::string(v ? "true" : "false")); }
    void put(const std::string& key, int v) { put(key, std::to_string(v)); }

    // Closed forms print as expressions; numeric leaves as samples on I.
    void put(const std::string& key, const Expression& e, const Interval& I) {
        if (e.is_closed_form()) {
            put(key, to_string(e));
            return;
        }
        put(key, std::string("numeric"));
        for (double s : chebyshev_nodes(I, kNumericSamples))
            put(key + "(" + format_double(s) + ")", evaluate(e, s));
    }

    void put_ode(const std::string& prefix, const LinearODE& ode) {
        put(prefix + "order", ode.order());
        for (int m = 0; m < ode.order(); ++m)
            put(prefix + "a" + std::to_string(m), ode.coeff(m), ode.interval());
        put(prefix + "b", ode.rhs(), ode.interval());
        put(prefix + "interval", write_interval(ode.interval()));
    }

    void put_tau(const std::string& prefix, const PointTransformation& tau) {
        put(prefix + "T", tau.T(), tau.source());
        put(prefix + "X1", tau.X1(), tau.source());
        put(prefix + "X0", tau.X0(), tau.source());
        put(prefix + "interval", write_interval(tau.source()));
    }

    void put_verdict(const std::string& key, const Verdict& v) {
        put(key, v.ok);
        put("reason", v.reason);
        if (!v.ok && std::isfinite(v.worst))
            put("worst", v.worst);
        if (!v.ok && std::isfinite(v.where))
            put("where", v.where);
    }

private:
    RunReport& report_;
};

class Inputs {
public:
    explicit Inputs(RunReport& report) : report_(report) {}

    std::string read(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw Error("io", "cannot read '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        std::string text = ss.str();
        hash_ = fnv1a(text, fnv1a(std::string_view("\0", 1), hash_));
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016" PRIx64, hash_);
        report_.digest = buf;
        return text;
    }

private:
    RunReport& report_;
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string join(const std::vector<std::string>& args) {
    std::string out = "lodeq";
    for (const auto& a : args)
        out += " " + a;
    return out;
}

std::string document_kind(const Document& doc) {
    if (doc.has("T"))
        return "transformation";
    if (doc.has("chi1"))
        return "system";
    return "ode";
}

} // namespace

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RunReport run(const std::vector<std::string>& args) {
    RunReport report;
    report.command = join(args);
    Emitter out(report);
    Inputs inputs(report);
    Globals g;

    CLI::App app{"Linear ODE point transformations, gauges and symmetry classification", "lodeq"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--tol", g.tol, "Tolerance for sampled comparisons")->check(CLI::PositiveNumber);
    app.add_option("--samples", g.samples, "Sample count for sampled comparisons")->check(CLI::Range(2, 100000));
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json-lines"}));

    std::string ode_path, tau_path, target_path, system_path, file_path, gauge_to, cls;
    std::optional<double> t0;
    int order = 0;
    bool homogeneous = false;

    auto* transform = app.add_subcommand("transform", "Apply a point transformation to an equation");
    transform->add_option("ode", ode_path)->required();
    transform->add_option("tau", tau_path)->required();

    auto* gauge = app.add_subcommand("gauge", "Map an equation to a canonical form");
    gauge->add_option("ode", ode_path)->required();
    gauge->add_option("--to", gauge_to)->required()->check(CLI::IsMember({"rational", "lf", "arnold1", "arnold2"}));
    gauge->add_option("--t0", t0);

    auto* classify = app.add_subcommand("classify", "Dimension of the point symmetry algebra");
    classify->add_option("ode", ode_path)->required();

    auto* verify = app.add_subcommand("verify", "Check that tau maps source onto target");
    verify->add_option("source", ode_path)->required();
    verify->add_option("target", target_path)->required();
    verify->add_option("tau", tau_path)->required();

    auto* member = app.add_subcommand("member", "Membership in the equivalence group of a class");
    member->add_option("tau", tau_path)->required();
    member->add_option("--class", cls)->required()->check(CLI::IsMember({"L", "L1", "L2", "A1", "A2"}));
    member->add_option("--order", order)->required()->check(CLI::Range(1, 64));
    member->add_flag("--homogeneous", homogeneous);

    auto* fundamental = app.add_subcommand("fundamental", "Fundamental system of the homogeneous part");
    fundamental->add_option("ode", ode_path)->required();
    fundamental->add_option("--t0", t0)->required();

    auto* recover = app.add_subcommand("recover", "Equation with a given fundamental system");
    recover->add_option("system", system_path)->required();

    auto* parse = app.add_subcommand("parse", "Parse a document and check the write/parse round trip");
    parse->add_option("file", file_path)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out.put("help", app.help());
        report.format = "text";
        return report;
    } catch (const CLI::ParseError& e) {
        report.diagnostics.push_back({"usage", e.what()});
        report.exit_code = 2;
        return report;
    }
    report.format = g.format;

    try {
        if (*transform) {
            LinearODE ode = parse_ode(inputs.read(ode_path));
            PointTransformation tau = parse_transformation(inputs.read(tau_path));
            if (!tau.source().contains(ode.interval()))
                ode = ode.restricted(tau.source());
            out.put_ode("", apply_to_ode(tau.restricted(ode.interval()), ode));
        } else if (*gauge) {
            LinearODE ode = parse_ode(inputs.read(ode_path));
            double at = t0.value_or(ode.interval().mid());
            GaugeResult res = gauge_to == "rational" ? to_rational(ode)
                              : gauge_to == "lf"     ? to_laguerre_forsyth(ode, at)
                              : gauge_to == "arnold1" ? to_arnold1(ode, at)
                                                      : to_arnold2(ode, at);
            out.put_tau("tau.", res.tau);
            out.put_ode("ode.", res.gauged);
            out.put("residual", res.residual);
            out.put("shrunk", res.shrunk);
            if (res.shrunk)
                out.put("requested", write_interval(res.requested));
        } else if (*classify) {
            LinearODE ode = parse_ode(inputs.read(ode_path));
            ClassifyOptions opts;
            opts.tol = g.tol;
            SymmetryClassification c = classify_dimension(ode, opts);
            out.put("dimension", c.dimension);
            out.put("case", to_string(c.label));
            out.put("confidence", to_string(c.confidence));
            out.put("pattern", c.pattern);
            if (c.witness)
                out.put_tau("witness.", *c.witness);
        } else if (*verify) {
            LinearODE source = parse_ode(inputs.read(ode_path));
            LinearODE target = parse_ode(inputs.read(target_path));
            PointTransformation tau = parse_transformation(inputs.read(tau_path));
            if (!tau.source().contains(source.interval()))
                throw InvalidArgument("interval_mismatch", "transformation is not defined on the source interval");
            Verdict v = verify_admissible({source, target, tau.restricted(source.interval())}, {g.tol, g.samples});
            out.put_verdict("admissible", v);
        } else if (*member) {
            PointTransformation tau = parse_transformation(inputs.read(tau_path));
            Verdict v = in_equivalence_group(tau, parse_class_tag(cls), order, homogeneous, {g.tol, g.samples});
            out.put_verdict("member", v);
        } else if (*fundamental) {
            LinearODE ode = parse_ode(inputs.read(ode_path));
            FundamentalSystem fs = fundamental_system(ode, *t0);
            out.put("order", fs.order());
            out.put("t0", *t0);
            for (int i = 0; i < fs.order(); ++i)
                out.put("chi" + std::to_string(i + 1), fs.chi[static_cast<std::size_t>(i)], fs.interval);
            out.put("interval", write_interval(fs.interval));
            out.put("wronskian", wronskian(fs), fs.interval);
        } else if (*recover) {
            FundamentalSystem fs = parse_system(inputs.read(system_path));
            LinearODE ode = coefficients_from_fundamental_system(fs);
            out.put_ode("", ode);
            double worst = 0;
            for (const Expression& c : fs.chi)
                worst = std::max(worst, solution_defect(c, ode, 20));
            out.put("residual", worst);
        } else if (*parse) {
            std::string text = inputs.read(file_path);
            std::string kind = document_kind(Document::parse(text));
            std::string first, second;
            if (kind == "transformation") {
                first = write_transformation(parse_transformation(text));
                second = write_transformation(parse_transformation(first));
            } else if (kind == "system") {
                first = write_system(parse_system(text));
                second = write_system(parse_system(first));
            } else {
                first = write_ode(parse_ode(text));
                second = write_ode(parse_ode(first));
            }
            out.put("kind", kind);
            out.put("roundtrip", first == second);
            Document canonical = Document::parse(first);
            for (const auto& e : canonical.entries())
                out.put(e.key, e.value);
        }
    } catch (const ParseError& e) {
        report.diagnostics.push_back({e.code(), e.what()});
        report.exit_code = 1;
    } catch (const Error& e) {
        report.diagnostics.push_back({e.code(), e.what()});
        report.exit_code = 1;
    }
    return report;
}

std::string render(const RunReport& report) {
    std::string s;
    if (report.format == "json-lines") {
        nlohmann::ordered_json head;
        head["command"] = report.command;
        head["digest"] = report.digest;
        s += head.dump() + "\n";
        for (const auto& r : report.outputs) {
            nlohmann::ordered_json j;
            j["key"] = r.key;
            j["value"] = r.value;
            s += j.dump() + "\n";
        }
        for (const auto& d : report.diagnostics) {
            nlohmann::ordered_json j;
            j["error"] = d.code;
            j["message"] = d.message;
            s += j.dump() + "\n";
        }
        nlohmann::ordered_json tail;
        tail["exit"] = report.exit_code;
        s += tail.dump() + "\n";
        return s;
    }
    if (report.outputs.size() == 1 && report.outputs[0].key == "help")
        return report.outputs[0].value;
    s += "# " + report.command + "\n";
    if (!report.digest.empty())
        s += "# digest " + report.digest + "\n";
    for (const auto& r : report.outputs)
        s += r.key + " = " + r.value + "\n";
    for (const auto& d : report.diagnostics)
        s += "error = " + d.code + ": " + d.message + "\n";
    return s;
}

} // namespace lodeq::cli
