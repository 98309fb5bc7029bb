#include "mixtraffic/turn/merge.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mixtraffic::turn {

namespace {

// t + (exp(-phi t) - 1) / phi, expanded near zero to avoid cancellation.
double shifted_ramp(double t, double phi) {
    const double x = phi * t;
    if (x < 1e-3) return t * x * (0.5 - x / 6.0 + x * x / 24.0);
    return t + std::expm1(-x) / phi;
}

}  // namespace

double position_profile(double t, double v_des, double phi) {
    if (t < 0.0) throw std::invalid_argument("position_profile: t must be >= 0");
    return v_des * shifted_ramp(t, phi);
}

double solve_tau_j(double d_j, double v_des, double phi) {
    if (!(d_j > 0.0)) throw std::invalid_argument("solve_tau_j: d_j must be > 0");
    constexpr double kTol = 1e-10;
    constexpr int kMaxIter = 100;

    auto residual = [&](double tau) { return position_profile(tau, v_des, phi) - d_j; };

    // The profile is convex and increasing, so Newton from the asymptote, which
    // lies to the right of the root, descends monotonically. Bracket [lo, hi]
    // is maintained for the bisection fallback.
    double lo = 0.0;
    double hi = d_j / v_des + 1.0 / phi;
    double tau = hi;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        const double f = residual(tau);
        if (std::abs(f) < kTol) return tau;
        if (f > 0.0)
            hi = tau;
        else
            lo = tau;
        const double slope = v_des * -std::expm1(-phi * tau);
        double next = slope > 0.0 ? tau - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo < 1e-15 * std::max(1.0, hi)) return next;
        tau = next;
    }
    throw std::runtime_error("solve_tau_j: no convergence for d_j=" + std::to_string(d_j));
}

double tau_i_headway(double v_c, double d_i, double u_max, double v_max) {
    if (v_c < 0.0 || v_c > v_max)
        throw std::invalid_argument("tau_i_headway: v_c must lie in [0, v_max]");
    const double accel_distance = (v_max * v_max - v_c * v_c) / (2.0 * u_max);
    if (d_i <= accel_distance)
        return (std::sqrt(v_c * v_c + 2.0 * u_max * d_i) - v_c) / u_max;
    return (v_max - v_c) / u_max + (d_i - accel_distance) / v_max;
}

bool can_merge(double tau_j, std::optional<double> tau_i, double tau_s) {
    if (tau_s < 0.0) throw std::invalid_argument("can_merge: tau_s must be >= 0");
    if (!tau_i) return true;
    return tau_j <= *tau_i - tau_s;
}

}  // namespace mixtraffic::turn
