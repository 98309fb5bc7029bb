#pragma once

#include "mixtraffic/core/types.hpp"

namespace mixtraffic::hdv {

/// Intelligent Driver Model parameters. `gamma` is the jam distance and is kept
/// equal to LimitsConfig::gamma by the scenario loader.
struct IdmParams {
    double v_des = 12.0;     // m/s
    double xi = 4.0;         // acceleration exponent
    double T_headway = 1.5;  // s
    double beta = 2.0;       // m/s^2, comfortable deceleration
    double gamma = 5.0;      // m

    void validate() const;
    friend bool operator==(const IdmParams&, const IdmParams&) = default;
};

inline constexpr double kIdmGapFloor = 0.1;  // m

/// Desired dynamic gap s*(v, dv) with dv = v - v_leader.
double desired_gap(double v, double delta_v, const IdmParams& params, double u_max);

/// IDM acceleration clamped to [-u_max, u_max]. `gap` is the spacing to the
/// leader (+inf for a free road); nonpositive gaps return -u_max.
double idm_accel(double v, double delta_v, double gap, const IdmParams& params, double u_max);

}  // namespace mixtraffic::hdv
