#pragma once

#include "lodeq/ode.hpp"
#include "lodeq/transform.hpp"

#include <functional>
#include <string>

namespace lodeq {

struct GaugeResult {
    PointTransformation tau;
    LinearODE gauged;
    // Sup-norm of the coefficients the gauge is meant to annihilate.
    double residual = 0;
    // Set when the gauge only holds on a subinterval of the input.
    bool shrunk = false;
    Interval requested;
};

// Nonvanishing thresholds for phi_1, psi_1 and T_t relative to their value at t0.
inline constexpr double kShrinkThreshold = 1e-2;

GaugeResult to_rational(const LinearODE& ode);
GaugeResult to_laguerre_forsyth(const LinearODE& ode, double t0);
GaugeResult to_arnold1(const LinearODE& ode, double t0);
GaugeResult to_arnold2(const LinearODE& ode, double t0);

// Largest subinterval around t0 on which ok() holds at a fine grid of samples.
Interval shrink_interval(const std::function<bool(double)>& ok, const Interval& I, double t0, int samples = 512);

} // namespace lodeq
