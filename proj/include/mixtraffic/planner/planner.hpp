#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixtraffic/cbf/bounds.hpp"
#include "mixtraffic/core/signal_schedule.hpp"
#include "mixtraffic/core/types.hpp"

namespace mixtraffic::planner {

enum class BrakingMode { CrossingTimeBrake, RearEndVirtualBrake };

const char* to_string(BrakingMode mode);

/// Which constraint produced the emitted acceleration.
enum class BoundTag : std::uint8_t {
    Reference,
    ControlLower,
    ControlUpper,
    SpeedLower,
    SpeedUpper,
    RearEnd,
    Virtual,
    CrossLower,
    CrossUpper,
};

const char* to_string(BoundTag tag);

struct CavPlannerState {
    CrossingWindow window;
    BrakingMode mode = BrakingMode::CrossingTimeBrake;
    bool crossed = false;
    bool merge_permitted = false;  // right turn on red granted, crossing bounds released
    double entered_at = 0.0;
    int switch_count = 0;  // CrossingTime -> RearEndVirtual transitions so far
    int window_advances = 0;
};

/// Raised when no admissible crossing window exists within the search horizon.
class FeasibilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double min_crossing_time(double v, double delta_p, double u_max);

double vmax_feasible_time(double v, double v_max, double delta_p);

/// Earliest window whose time-to-close satisfies both the full-throttle reach
/// test and the top-speed test. Empty when none qualifies.
std::optional<CrossingWindow> select_window(std::span<const CrossingWindow> windows, double now,
                                            double v, double delta_p,
                                            const LimitsConfig& limits);

bool overshoot_safe(double delta_t1, double delta_p, double u_max);

BrakingMode braking_mode(double delta_t1, double delta_p, double u_max);

struct PlannerContext {
    const SignalSchedule* schedule = nullptr;
    GainsConfig gains;
    LimitsConfig limits;
    double stop_line = 200.0;             // m, p_tr on the vehicle's path
    double revalidation_tolerance = 0.05;  // s, slack on the per-tick window checks
    int max_cycles = 10;                   // search horizon for window selection
    double dt = 0.05;                      // s, tick length of the caller
};

/// Initial window selection when the CAV enters the traffic-light region.
CavPlannerState enter_region(const VehicleState& state, const PlannerContext& ctx, double now);

/// An empty intersection met during a tick, with the binding bounds.
struct InfeasibleRecord {
    long window = 0;
    double lo = 0.0;
    BoundTag lo_tag = BoundTag::ControlLower;
    double hi = 0.0;
    BoundTag hi_tag = BoundTag::ControlUpper;
};

struct TickOutput {
    double accel = 0.0;
    double reference = 0.0;
    cbf::ControlInterval bounds;
    BoundTag active = BoundTag::Reference;
    CavPlannerState planner;
    int infeasible = 0;         // empty intersections resolved by a window advance
    std::vector<InfeasibleRecord> infeasible_log;
    int advances = 0;           // window advances performed this tick
    bool committed = false;     // open window, stop line within braking distance
};

/// One control step: assembles every bound, advances the crossing window until
/// the feasible set is nonempty, and returns the clamped reference input.
TickOutput cav_tick(const VehicleState& state, const CavPlannerState& planner,
                    const cbf::LeaderObservation& leader, const PlannerContext& ctx, double now);

}  // namespace mixtraffic::planner
