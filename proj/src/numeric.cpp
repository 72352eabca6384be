#include "lodeq/numeric.hpp"

#include "dop853_tableau.hpp"

#include <algorithm>
#include <cmath>

namespace lodeq {

namespace {

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;
constexpr double kErrorExponent = -1.0 / 8.0;

double rms(const std::vector<double>& v) {
    double s = 0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

class Stepper {
public:
    Stepper(const OdeRhs& f, int n, const SolverOptions& opts) : f_(f), n_(n), opts_(opts), K_(dop853::kStagesExtended, std::vector<double>(n)) {}

    std::vector<DenseTrajectory::Segment> run(double t0, std::vector<double> y, double t_bound) {
        std::vector<DenseTrajectory::Segment> segs;
        if (t_bound == t0)
            return segs;
        double dir = t_bound > t0 ? 1.0 : -1.0;
        double t = t0;
        std::vector<double> fy(n_);
        call(t, y.data(), fy.data());
        double max_step = std::min(opts_.max_step, std::abs(t_bound - t0));
        double h_abs = std::min(initial_step(t, y, fy, dir, std::abs(t_bound - t)), max_step);
        long steps = 0;
        while (dir * (t_bound - t) > 0) {
            if (++steps > opts_.max_steps)
                throw SolverError("max_steps", "integrator exceeded the step budget");
            double min_step = 10.0 * std::abs(std::nextafter(t, dir * INFINITY) - t);
            h_abs = std::clamp(h_abs, min_step, max_step);
            bool rejected = false;
            std::vector<double> y_new(n_), f_new(n_);
            double h = 0;
            for (;;) {
                if (h_abs < min_step)
                    throw SolverError("step_size_underflow", "step size underflow; coefficients may be singular");
                h = h_abs * dir;
                double t_new = t + h;
                if (dir * (t_new - t_bound) > 0)
                    t_new = t_bound;
                h = t_new - t;
                h_abs = std::abs(h);
                rk_step(t, y, fy, h, y_new, f_new);
                double err = error_norm(h, y, y_new);
                if (err < 1.0) {
                    double factor = err == 0.0 ? kMaxFactor : std::min(kMaxFactor, kSafety * std::pow(err, kErrorExponent));
                    if (rejected)
                        factor = std::min(1.0, factor);
                    h_abs *= factor;
                    break;
                }
                h_abs *= std::max(kMinFactor, kSafety * std::pow(err, kErrorExponent));
                rejected = true;
            }
            segs.push_back(dense_segment(t, h, y, fy, y_new, f_new));
            t = t + h;
            if (dir * (t_bound - t) <= 0)
                t = t_bound;
            y = y_new;
            fy = f_new;
        }
        return segs;
    }

private:
    void call(double t, const double* y, double* out) {
        f_(t, y, out);
        for (int i = 0; i < n_; ++i)
            if (!std::isfinite(out[i]))
                throw SolverError("singular_coefficient", "non-finite derivative during integration");
    }

    double initial_step(double t0, const std::vector<double>& y0, const std::vector<double>& f0, double dir, double span) {
        std::vector<double> a(n_), b(n_);
        for (int i = 0; i < n_; ++i) {
            double scale = opts_.atol + std::abs(y0[i]) * opts_.rtol;
            a[i] = y0[i] / scale;
            b[i] = f0[i] / scale;
        }
        double d0 = rms(a), d1 = rms(b);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        // The probe point must stay inside the integration range.
        h0 = std::min(h0, span);
        std::vector<double> y1(n_), f1(n_);
        for (int i = 0; i < n_; ++i)
            y1[i] = y0[i] + h0 * dir * f0[i];
        call(t0 + h0 * dir, y1.data(), f1.data());
        for (int i = 0; i < n_; ++i)
            a[i] = (f1[i] - f0[i]) / (opts_.atol + std::abs(y0[i]) * opts_.rtol);
        double d2 = rms(a) / h0;
        double h1 = (d1 <= 1e-15 && d2 <= 1e-15) ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 1.0 / 8.0);
        return std::min(100 * h0, h1);
    }

    void stage(int s, double t, const std::vector<double>& y, double h, double c) {
        std::vector<double> ys(y);
        for (int j = 0; j < s; ++j) {
            double a = dop853::A[s][j];
            if (a == 0.0)
                continue;
            for (int i = 0; i < n_; ++i)
                ys[i] += h * a * K_[j][i];
        }
        call(t + c * h, ys.data(), K_[s].data());
    }

    void rk_step(double t, const std::vector<double>& y, const std::vector<double>& fy, double h, std::vector<double>& y_new,
                 std::vector<double>& f_new) {
        K_[0] = fy;
        for (int s = 1; s < dop853::kStages; ++s)
            stage(s, t, y, h, dop853::C[s]);
        y_new = y;
        for (int j = 0; j < dop853::kStages; ++j)
            for (int i = 0; i < n_; ++i)
                y_new[i] += h * dop853::B[j] * K_[j][i];
        call(t + h, y_new.data(), f_new.data());
        K_[dop853::kStages] = f_new;
    }

    double error_norm(double h, const std::vector<double>& y, const std::vector<double>& y_new) {
        double e5 = 0, e3 = 0;
        for (int i = 0; i < n_; ++i) {
            double scale = opts_.atol + std::max(std::abs(y[i]), std::abs(y_new[i])) * opts_.rtol;
            double s5 = 0, s3 = 0;
            for (int j = 0; j <= dop853::kStages; ++j) {
                s5 += K_[j][i] * dop853::E5[j];
                s3 += K_[j][i] * dop853::E3[j];
            }
            s5 /= scale;
            s3 /= scale;
            e5 += s5 * s5;
            e3 += s3 * s3;
        }
        if (e5 == 0 && e3 == 0)
            return 0;
        return std::abs(h) * e5 / std::sqrt((e5 + 0.01 * e3) * n_);
    }

    DenseTrajectory::Segment dense_segment(double t, double h, const std::vector<double>& y, const std::vector<double>& fy,
                                           const std::vector<double>& y_new, const std::vector<double>& f_new) {
        for (int s = dop853::kStages + 1; s < dop853::kStagesExtended; ++s)
            stage(s, t, y, h, dop853::C[s]);
        DenseTrajectory::Segment seg;
        seg.t_old = t;
        seg.h = h;
        seg.y_old = y;
        seg.F.assign(dop853::kInterpolatorPower, std::vector<double>(n_));
        for (int i = 0; i < n_; ++i) {
            double dy = y_new[i] - y[i];
            seg.F[0][i] = dy;
            seg.F[1][i] = h * fy[i] - dy;
            seg.F[2][i] = 2 * dy - h * (f_new[i] + fy[i]);
            for (int r = 0; r < dop853::kInterpolatorPower - 3; ++r) {
                double s = 0;
                for (int j = 0; j < dop853::kStagesExtended; ++j)
                    s += dop853::D[r][j] * K_[j][i];
                seg.F[3 + r][i] = h * s;
            }
        }
        return seg;
    }

    const OdeRhs& f_;
    int n_;
    SolverOptions opts_;
    std::vector<std::vector<double>> K_;
};

} // namespace

DenseTrajectory::DenseTrajectory(int dim, Interval interval, std::vector<Segment> segments)
    : dim_(dim), interval_(interval), segments_(std::move(segments)) {
    std::sort(segments_.begin(), segments_.end(),
              [](const Segment& a, const Segment& b) { return std::min(a.t_old, a.t_old + a.h) < std::min(b.t_old, b.t_old + b.h); });
}

const DenseTrajectory::Segment& DenseTrajectory::locate(double t) const {
    if (segments_.empty())
        throw DomainError("out_of_interval", "empty trajectory");
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const Segment& s) { return v < std::min(s.t_old, s.t_old + s.h); });
    if (it == segments_.begin())
        return segments_.front();
    return *(it - 1);
}

double DenseTrajectory::value(int c, double t) const {
    const Segment& s = locate(t);
    double x = (t - s.t_old) / s.h;
    double y = 0;
    for (int i = static_cast<int>(s.F.size()) - 1, k = 0; i >= 0; --i, ++k) {
        y += s.F[i][c];
        y *= (k % 2 == 0) ? x : 1 - x;
    }
    return y + s.y_old[c];
}

double DenseTrajectory::slope(int c, double t) const {
    const Segment& s = locate(t);
    double x = (t - s.t_old) / s.h;
    double dx = 1.0 / s.h;
    double y = 0, dy = 0;
    for (int i = static_cast<int>(s.F.size()) - 1, k = 0; i >= 0; --i, ++k) {
        y += s.F[i][c];
        if (k % 2 == 0) {
            dy = dy * x + y * dx;
            y *= x;
        } else {
            dy = dy * (1 - x) - y * dx;
            y *= 1 - x;
        }
    }
    return dy;
}

DenseTrajectory integrate_dop853(const OdeRhs& f, int dim, double t0, std::span<const double> y0, const Interval& I,
                                 const SolverOptions& opts) {
    if (!I.contains(t0))
        throw InvalidArgument("initial_point", "initial point outside the interval");
    if (static_cast<int>(y0.size()) != dim)
        throw InvalidArgument("initial_data", "initial data has the wrong length");
    std::vector<double> y(y0.begin(), y0.end());
    Stepper fwd(f, dim, opts);
    auto segs = fwd.run(t0, y, I.hi);
    Stepper bwd(f, dim, opts);
    auto back = bwd.run(t0, y, I.lo);
    segs.insert(segs.end(), back.begin(), back.end());
    return DenseTrajectory(dim, I, std::move(segs));
}

// ---------------------------------------------------------------------------

LinearSolutionLeaf::LinearSolutionLeaf(std::string id, LinearSystem sys, std::shared_ptr<const DenseTrajectory> traj, int max_order,
                                       std::string provenance)
    : NumericLeaf(std::move(id), traj->interval(), max_order, std::move(provenance)), sys_(std::move(sys)), traj_(std::move(traj)) {}

const LinearSolutionLeaf::Relation& LinearSolutionLeaf::relation(int k) const {
    const int r = sys_.order();
    std::lock_guard<std::mutex> lock(mutex_);
    if (relations_.empty()) {
        Relation base;
        for (int m = 0; m < r; ++m)
            base.beta.push_back(-sys_.coeffs[m]);
        base.gamma = sys_.rhs;
        relations_.push_back(std::move(base));
    }
    while (static_cast<int>(relations_.size()) <= k - r) {
        const Relation& prev = relations_.back();
        Relation next;
        const Expression& top = prev.beta[r - 1];
        for (int m = 0; m < r; ++m) {
            std::vector<Expression> terms{differentiate(prev.beta[m]), -(top * sys_.coeffs[m])};
            if (m > 0)
                terms.push_back(prev.beta[m - 1]);
            next.beta.push_back(make_sum(std::move(terms)));
        }
        next.gamma = differentiate(prev.gamma) + top * sys_.rhs;
        relations_.push_back(std::move(next));
    }
    return relations_[static_cast<std::size_t>(k - r)];
}

double LinearSolutionLeaf::compute(int k, double t) const {
    const int r = sys_.order();
    if (k < r)
        return traj_->value(k, t);
    const Relation& rel = relation(k);
    Evaluator ev(t);
    double v = ev(rel.gamma);
    for (int m = 0; m < r; ++m)
        v += ev(rel.beta[m]) * traj_->value(m, t);
    return v;
}

IVPSolution solve_ivp(const LinearSystem& sys, double t0, std::span<const double> init, const SolverOptions& opts,
                      const std::string& label) {
    const int r = sys.order();
    if (r < 1)
        throw InvalidArgument("order", "system order must be positive");
    if (static_cast<int>(init.size()) != r)
        throw InvalidArgument("initial_data", "initial data must have one entry per state component");
    std::vector<Expression> exprs = sys.coeffs;
    exprs.push_back(sys.rhs);
    bool has_rhs = !sys.rhs.is_zero();
    OdeRhs f = [&](double t, const double* y, double* dy) {
        std::vector<double> v;
        try {
            v = evaluate_many(exprs, t);
        } catch (const Error& e) {
            throw SolverError("singular_coefficient", std::string("coefficient singular inside the interval: ") + e.what());
        }
        double top = has_rhs ? v[r] : 0.0;
        for (int m = 0; m < r; ++m)
            top -= v[m] * y[m];
        for (int m = 0; m + 1 < r; ++m)
            dy[m] = y[m + 1];
        dy[r - 1] = top;
    };
    SolverOptions o = opts;
    if (!std::isfinite(o.max_step))
        o.max_step = sys.interval.length() / 32;
    auto traj = std::make_shared<const DenseTrajectory>(integrate_dop853(f, r, t0, init, sys.interval, o));
    auto leaf = std::make_shared<const LinearSolutionLeaf>(next_leaf_id(label), sys, traj, r + 16, label);
    return IVPSolution{leaf, std::max(opts.atol, opts.rtol)};
}

IVPSolution solve_ivp(const LinearODE& ode, double t0, std::span<const double> init, double tol) {
    SolverOptions opts;
    opts.atol = opts.rtol = tol;
    return solve_ivp(LinearSystem{ode.coeffs(), ode.rhs(), ode.interval()}, t0, init, opts, "x");
}

} // namespace lodeq
