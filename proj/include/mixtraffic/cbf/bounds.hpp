#pragma once

#include <limits>
#include <span>
#include <variant>

#include "mixtraffic/core/types.hpp"

// Acceleration bounds for a double-integrator vehicle derived from control
// barrier functions. Every bound is an affine restriction on the scalar input u,
// so the per-tick QP collapses to clamping the reference input.
namespace mixtraffic::cbf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Gap floor applied before the square root of the rear-end barrier.
inline constexpr double kGapFloor = 1e-6;

struct ControlInterval {
    double lo = -kInf;
    double hi = kInf;

    bool contains(double u) const { return lo <= u && u <= hi; }
    friend bool operator==(const ControlInterval&, const ControlInterval&) = default;
};

/// Position and derivatives of the vehicle ahead, expressed in the follower's
/// path coordinate. When `exists` is false the leader is at +infinity.
struct LeaderObservation {
    double gap_position = kInf;  // delta(t)
    double gap_speed = 0.0;      // d delta / dt
    double gap_accel = 0.0;      // d^2 delta / dt^2
    bool exists = false;

    static LeaderObservation none() { return {}; }
    static LeaderObservation at(double position, double speed, double accel) {
        return {position, speed, accel, true};
    }
};

struct Infeasible {
    double max_lo;
    double min_hi;
};

using IntersectResult = std::variant<ControlInterval, Infeasible>;

/// LQR tracking law phi * (v_des - v). Not clamped.
double reference_control(double v, double v_des, double phi);

/// Raw bounds from the speed barriers b1 = v_max - v and b2 = v - v_min.
ControlInterval speed_bounds(double v, const LimitsConfig& limits, double kappa_s);

/// Lower bound that keeps b3 = v - dp/dt2 + u_max*dt2/2 nonnegative, i.e. the
/// stop line is reached no later than t_upper. Throws on delta_t2 <= 0.
double crossing_lower_bound(double delta_p, double delta_t2, double v, double kappa_T,
                            double u_max);

/// Upper bound that keeps b4 = dp/dt1 + u_max*dt1/2 - v nonnegative, i.e. the
/// stop line is not reached before t_lower. Throws on delta_t1 <= 0.
double crossing_upper_bound(double delta_p, double delta_t1, double v, double kappa_T,
                            double u_max);

/// High-order rear-end bound built on the stopping-distance barrier
///   b = d_delta - v + sqrt(2 u_max (delta - p - gamma)).
/// Returns +inf without a leader and -u_max once the gap is already violated.
double rear_end_upper_bound(double p, double v, const LeaderObservation& leader, double gamma,
                            double kappa, double u_max);

/// Intersection of the given intervals with [-u_max, u_max].
IntersectResult intersect_bounds(std::span<const ControlInterval> intervals, double u_max);

/// argmin (u_ref - u)^2 over the interval. Throws std::invalid_argument when lo > hi.
double solve_problem1(double u_ref, const ControlInterval& bounds);

}  // namespace mixtraffic::cbf
