#include "mixtraffic/cbf/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mixtraffic::cbf {

double reference_control(double v, double v_des, double phi) {
    return phi * (v_des - v);
}

ControlInterval speed_bounds(double v, const LimitsConfig& limits, double kappa_s) {
    return {kappa_s * (limits.v_min - v), kappa_s * (limits.v_max - v)};
}

double crossing_lower_bound(double delta_p, double delta_t2, double v, double kappa_T,
                            double u_max) {
    if (!(delta_t2 > 0.0))
        throw std::invalid_argument("crossing_lower_bound: delta_t2 must be > 0, got " +
                                    std::to_string(delta_t2));
    const double b3 = v - delta_p / delta_t2 + 0.5 * u_max * delta_t2;
    return -kappa_T * b3 + (delta_p - v * delta_t2) / (delta_t2 * delta_t2) + 0.5 * u_max;
}

double crossing_upper_bound(double delta_p, double delta_t1, double v, double kappa_T,
                            double u_max) {
    if (!(delta_t1 > 0.0))
        throw std::invalid_argument("crossing_upper_bound: delta_t1 must be > 0, got " +
                                    std::to_string(delta_t1));
    const double b4 = delta_p / delta_t1 + 0.5 * u_max * delta_t1 - v;
    return kappa_T * b4 + (delta_p - v * delta_t1) / (delta_t1 * delta_t1) - 0.5 * u_max;
}

double rear_end_upper_bound(double p, double v, const LeaderObservation& leader, double gamma,
                            double kappa, double u_max) {
    if (!leader.exists) return kInf;
    double gap = leader.gap_position - p - gamma;
    if (gap <= 0.0) return -u_max;
    gap = std::max(gap, kGapFloor);
    const double reach = std::sqrt(2.0 * u_max * gap);
    const double closing = v - leader.gap_speed;
    const double barrier = reach - closing;
    return leader.gap_accel - u_max * closing / reach + kappa * barrier;
}

IntersectResult intersect_bounds(std::span<const ControlInterval> intervals, double u_max) {
    double lo = -u_max;
    double hi = u_max;
    for (const auto& iv : intervals) {
        lo = std::max(lo, iv.lo);
        hi = std::min(hi, iv.hi);
    }
    if (lo > hi) return Infeasible{lo, hi};
    return ControlInterval{lo, hi};
}

double solve_problem1(double u_ref, const ControlInterval& bounds) {
    if (!(bounds.lo <= bounds.hi))
        throw std::invalid_argument("solve_problem1: empty interval [" +
                                    std::to_string(bounds.lo) + ", " +
                                    std::to_string(bounds.hi) + "]");
    return std::clamp(u_ref, bounds.lo, bounds.hi);
}

}  // namespace mixtraffic::cbf
