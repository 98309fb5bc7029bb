#pragma once

#include <optional>

namespace mixtraffic::turn {

/// Geometry of one right-turn-on-red decision.
struct ConflictPoint {
    double d_j = 0.0;                  // m, stop line of the turning vehicle to the conflict point
    double d_i = 0.0;                  // m, oncoming vehicle to the conflict point
    std::optional<double> oncoming_v;  // m/s at decision time; empty when no vehicle is visible
};

/// Distance covered from rest under the reference law, v(t) = v_des (1 - exp(-phi t)).
double position_profile(double t, double v_des, double phi);

/// Unique tau > 0 with position_profile(tau) == d_j. Safeguarded Newton-Raphson
/// started on the asymptote d_j / v_des + 1 / phi, with bisection fallback.
double solve_tau_j(double d_j, double v_des, double phi);

/// Fastest arrival time of the oncoming vehicle: full throttle from v_c, then
/// cruising at v_max once reached.
double tau_i_headway(double v_c, double d_i, double u_max, double v_max);

bool can_merge(double tau_j, std::optional<double> tau_i, double tau_s);

}  // namespace mixtraffic::turn
