#include "mixtraffic/planner/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mixtraffic::planner {

using cbf::ControlInterval;
using cbf::kInf;

const char* to_string(BrakingMode mode) {
    return mode == BrakingMode::CrossingTimeBrake ? "crossing_time_brake"
                                                  : "rear_end_virtual_brake";
}

const char* to_string(BoundTag tag) {
    switch (tag) {
        case BoundTag::Reference: return "ref";
        case BoundTag::ControlLower: return "ctrl_lo";
        case BoundTag::ControlUpper: return "ctrl_hi";
        case BoundTag::SpeedLower: return "speed_lo";
        case BoundTag::SpeedUpper: return "speed_hi";
        case BoundTag::RearEnd: return "rear";
        case BoundTag::Virtual: return "virtual";
        case BoundTag::CrossLower: return "cross_lo";
        case BoundTag::CrossUpper: return "cross_hi";
    }
    return "?";
}

double min_crossing_time(double v, double delta_p, double u_max) {
    return (std::sqrt(v * v + 2.0 * u_max * delta_p) - v) / u_max;
}

double vmax_feasible_time(double v, double v_max, double delta_p) {
    return 2.0 * delta_p / (v_max + v);
}

namespace {

bool window_admissible(const CrossingWindow& w, double now, double v, double delta_p,
                       const LimitsConfig& limits, double tolerance) {
    const double dt2 = w.delta_t2(now);
    if (!(dt2 > 0.0)) return false;
    return dt2 + tolerance >= min_crossing_time(v, delta_p, limits.u_max) &&
           dt2 + tolerance >= vmax_feasible_time(v, limits.v_max, delta_p);
}

}  // namespace

std::optional<CrossingWindow> select_window(std::span<const CrossingWindow> windows, double now,
                                            double v, double delta_p,
                                            const LimitsConfig& limits) {
    for (const auto& w : windows)
        if (window_admissible(w, now, v, delta_p, limits, 0.0)) return w;
    return std::nullopt;
}

bool overshoot_safe(double delta_t1, double delta_p, double u_max) {
    return delta_t1 <= std::sqrt(2.0 * delta_p / u_max);
}

BrakingMode braking_mode(double delta_t1, double delta_p, double u_max) {
    if (delta_t1 <= 0.0) return BrakingMode::CrossingTimeBrake;
    return overshoot_safe(delta_t1, delta_p, u_max) ? BrakingMode::CrossingTimeBrake
                                                    : BrakingMode::RearEndVirtualBrake;
}

namespace {

// Windows of the next max_cycles cycles with their true end times (the listing
// clips the last one at the horizon).
std::vector<CrossingWindow> candidate_windows(const PlannerContext& ctx, double now,
                                              long after_k) {
    const double horizon = ctx.max_cycles * ctx.schedule->cycle_length();
    std::vector<CrossingWindow> out;
    for (auto w : ctx.schedule->green_windows(now, horizon)) {
        if (w.k <= after_k) continue;
        w.t_upper = ctx.schedule->window(w.k).t_upper;
        out.push_back(w);
    }
    return out;
}

CrossingWindow next_window(const PlannerContext& ctx, const VehicleState& state, double now,
                           long after_k) {
    const double delta_p = std::max(ctx.stop_line - state.position, 0.0);
    const auto windows = candidate_windows(ctx, now, after_k);
    auto chosen = select_window(windows, now, state.speed, delta_p, ctx.limits);
    if (!chosen)
        throw FeasibilityError("no admissible crossing window within " +
                               std::to_string(ctx.max_cycles) + " cycles at t=" +
                               std::to_string(now) + " (v=" + std::to_string(state.speed) +
                               ", dp=" + std::to_string(delta_p) + ")");
    return *chosen;
}

// Sampling guard for the continuous-time rear-end bound: over one tick at most
// half of the remaining gap may be consumed, and a gap at the floor admits no
// motion. Without it a vehicle held at rest can creep across a stationary
// target in finitely many ticks.
double sampled_gap_bound(double p, double v, const cbf::LeaderObservation& leader,
                         double gamma, double dt, double u_max) {
    if (!leader.exists) return kInf;
    const double gap = leader.gap_position - p - gamma;
    if (gap <= cbf::kGapFloor) return -u_max;
    return (0.5 * gap / dt + leader.gap_speed - v) / dt;
}

// A moving leader's acceleration is seen one tick late. Braking that starts
// unseen costs the follower up to v*dt of spacing, so real leaders are
// observed that much closer; the virtual leader never moves.
double rear_bound(const VehicleState& state, const cbf::LeaderObservation& leader,
                  double kappa, const PlannerContext& ctx, bool reaction_margin = true) {
    const auto& limits = ctx.limits;
    cbf::LeaderObservation seen = leader;
    if (reaction_margin && seen.exists) seen.gap_position -= state.speed * ctx.dt;
    return std::min(cbf::rear_end_upper_bound(state.position, state.speed, seen, limits.gamma,
                                              kappa, limits.u_max),
                    sampled_gap_bound(state.position, state.speed, leader, limits.gamma, ctx.dt,
                                      limits.u_max));
}

struct TaggedBound {
    double value;
    BoundTag tag;
};

struct SafetySet {
    TaggedBound lo{0.0, BoundTag::ControlLower};
    TaggedBound hi{0.0, BoundTag::ControlUpper};
};

// Control, speed and rear-end bounds, with the rear-end bounds floored at
// -u_max. Every input at or below -v/dt brings the vehicle to rest within the
// tick and so yields the same committed state; upper bounds below that level
// are lifted to it. This also covers a vehicle at rest behind a stopped leader.
SafetySet safety_set(const VehicleState& state, double rear_hi, double virtual_hi,
                     const PlannerContext& ctx) {
    const double u_max = ctx.limits.u_max;
    const ControlInterval speed = cbf::speed_bounds(state.speed, ctx.limits, ctx.gains.kappa_s);
    SafetySet s{{-u_max, BoundTag::ControlLower}, {u_max, BoundTag::ControlUpper}};
    if (speed.lo > s.lo.value) s.lo = {speed.lo, BoundTag::SpeedLower};
    if (speed.hi < s.hi.value) s.hi = {speed.hi, BoundTag::SpeedUpper};
    const double rear = std::max(rear_hi, -u_max);
    if (rear < s.hi.value) s.hi = {rear, BoundTag::RearEnd};
    const double virt = std::max(virtual_hi, -u_max);
    if (virt < s.hi.value) s.hi = {virt, BoundTag::Virtual};
    const double rest = std::min(0.0, -state.speed / ctx.dt);
    if (s.hi.value < rest) s.hi.value = rest;
    if (s.lo.value > s.hi.value) s.hi.value = s.lo.value;
    return s;
}

void finish(TickOutput& out, double lo, BoundTag lo_tag, double hi, BoundTag hi_tag) {
    out.bounds = {lo, hi};
    out.accel = cbf::solve_problem1(out.reference, out.bounds);
    if (out.accel == out.reference && out.reference > lo && out.reference < hi)
        out.active = BoundTag::Reference;
    else if (out.accel == hi && out.reference > hi)
        out.active = hi_tag;
    else if (out.accel == lo)
        out.active = lo_tag;
    else
        out.active = hi_tag;
}

void advance_window(TickOutput& out, const VehicleState& state, const PlannerContext& ctx,
                    double now) {
    out.planner.window = next_window(ctx, state, now, out.planner.window.k);
    ++out.planner.window_advances;
    ++out.advances;
}

}  // namespace

CavPlannerState enter_region(const VehicleState& state, const PlannerContext& ctx, double now) {
    CavPlannerState planner;
    planner.entered_at = now;
    planner.window = next_window(ctx, state, now, std::numeric_limits<long>::min());
    const double delta_p = std::max(ctx.stop_line - state.position, 0.0);
    planner.mode = braking_mode(planner.window.delta_t1(now), delta_p, ctx.limits.u_max);
    return planner;
}

TickOutput cav_tick(const VehicleState& state, const CavPlannerState& planner,
                    const cbf::LeaderObservation& leader, const PlannerContext& ctx, double now) {
    const auto& limits = ctx.limits;
    const auto& gains = ctx.gains;
    const double u_max = limits.u_max;

    TickOutput out;
    out.planner = planner;
    out.reference = cbf::reference_control(state.speed, limits.v_des, gains.phi);

    const double rear_hi = rear_bound(state, leader, gains.kappa_R, ctx);

    if (planner.crossed || planner.merge_permitted || state.position >= ctx.stop_line) {
        const SafetySet s = safety_set(state, rear_hi, kInf, ctx);
        finish(out, s.lo.value, s.lo.tag, s.hi.value, s.hi.tag);
        return out;
    }

    const double delta_p = ctx.stop_line - state.position;
    const double stopping = state.speed * state.speed / (2.0 * u_max);
    const bool open = out.planner.window.delta_t1(now) <= 0.0;
    if (!(open && stopping >= delta_p) &&
        !window_admissible(out.planner.window, now, state.speed, delta_p, limits,
                           ctx.revalidation_tolerance))
        advance_window(out, state, ctx, now);

    const auto virtual_leader = cbf::LeaderObservation::at(ctx.stop_line + limits.gamma, 0.0, 0.0);

    // Each pass either returns or advances k; next_window throws once the
    // search horizon is exhausted.
    for (;;) {
        const CrossingWindow& w = out.planner.window;
        const double dt1 = w.delta_t1(now);
        const double dt2 = w.delta_t2(now);

        const SafetySet base = safety_set(state, rear_hi, kInf, ctx);
        // Inside an open window with the stop line within braking distance the
        // vehicle is committed: no later window can be honoured. It keeps its
        // window and speed, and the arrival bound yields to the safety set.
        const bool committed = dt1 <= 0.0 && stopping >= delta_p;
        out.committed = committed;
        double cross_lo =
            dt2 > 0.0 ? cbf::crossing_lower_bound(delta_p, dt2, state.speed, gains.kappa_T, u_max)
                      : 0.0;
        if (committed) cross_lo = std::min({cross_lo, 0.0, base.hi.value});
        const double cross_hi =
            dt1 > 0.0 ? cbf::crossing_upper_bound(delta_p, dt1, state.speed, gains.kappa_T, u_max)
                      : kInf;

        // The virtual-vehicle mode is latched: once entered it holds until the
        // crossing. An early-arrival brake below the speed floor also forces it.
        if (out.planner.mode == BrakingMode::CrossingTimeBrake &&
            (braking_mode(dt1, delta_p, u_max) == BrakingMode::RearEndVirtualBrake ||
             cross_hi < base.lo.value)) {
            out.planner.mode = BrakingMode::RearEndVirtualBrake;
            ++out.planner.switch_count;
        }
        const bool virtual_mode = out.planner.mode == BrakingMode::RearEndVirtualBrake;

        const double virtual_hi =
            (virtual_mode && dt1 > 0.0)
                ? rear_bound(state, virtual_leader, gains.kappa_imag, ctx, false)
                : kInf;
        const SafetySet s = virtual_hi < kInf ? safety_set(state, rear_hi, virtual_hi, ctx) : base;

        TaggedBound lo = s.lo;
        TaggedBound hi = s.hi;
        // While the virtual leader holds the vehicle, the arrival bound is
        // suspended; the per-tick reach test guards the window instead, and at
        // rest it coincides with b3 >= 0 when the window opens.
        if (virtual_hi == kInf && cross_lo > lo.value) lo = {cross_lo, BoundTag::CrossLower};
        if (!virtual_mode && cross_hi < hi.value) hi = {cross_hi, BoundTag::CrossUpper};

        if (lo.value <= hi.value) {
            finish(out, lo.value, lo.tag, hi.value, hi.tag);
            return out;
        }
        ++out.infeasible;
        out.infeasible_log.push_back({w.k, lo.value, lo.tag, hi.value, hi.tag});
        advance_window(out, state, ctx, now);
    }
}

}  // namespace mixtraffic::planner
