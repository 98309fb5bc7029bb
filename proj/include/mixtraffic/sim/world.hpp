#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mixtraffic/cbf/bounds.hpp"
#include "mixtraffic/core/signal_schedule.hpp"
#include "mixtraffic/core/types.hpp"
#include "mixtraffic/hdv/idm.hpp"
#include "mixtraffic/planner/planner.hpp"
#include "mixtraffic/sim/arrivals.hpp"
#include "mixtraffic/sim/topology.hpp"

namespace mixtraffic::sim {

/// Leader acceleration a CAV assumes for a human-driven vehicle ahead.
enum class LeaderAccelPolicy {
    ConstantAccel,  // last effective acceleration
    BrakingOnly,    // last effective acceleration, positive values read as zero
    Robust,         // worst case, -u_max for HDV leaders; BrakingOnly for CAV leaders
};

const char* to_string(LeaderAccelPolicy p);
std::optional<LeaderAccelPolicy> parse_leader_accel_policy(const std::string& s);

inline constexpr double kGapTolerance = 0.05;    // m
inline constexpr double kSpeedTolerance = 0.01;  // m/s

struct WorldConfig {
    LimitsConfig limits;
    GainsConfig gains;
    hdv::IdmParams idm;
    LeaderAccelPolicy hdv_leader_accel = LeaderAccelPolicy::BrakingOnly;
    std::array<SignalSchedule, kApproachCount> signals = default_signals();
    TopologyConfig topology;
    TrafficConfig traffic;
    double dt = 0.05;  // s

    /// 90 s two-phase program: N/S green 42 s from t = 0, E/W green 42 s from
    /// t = 45, leaving 3 s all-red after each green.
    static std::array<SignalSchedule, kApproachCount> default_signals();

    void validate() const;
};

struct Vehicle {
    long id = 0;
    VehicleKind kind = VehicleKind::Cav;
    int approach = 0;
    Movement movement = Movement::Through;
    VehicleState state;
    double entered_at = 0.0;
    std::optional<double> crossed_at;

    planner::CavPlannerState planner;  // CAVs only
    planner::BoundTag active = planner::BoundTag::Reference;
    bool merge_permitted = false;  // right turn on red granted
    bool red_decided = false;      // HDV saw the current red phase
    bool red_commit = false;       // HDV too close to stop, runs through
    double accel_cmd = 0.0;
    long leader_id = -1;
    bool in_violation = false;
};

enum class EventKind {
    Spawn,
    Cross,
    Exit,
    Merge,
    LeaderChange,
    WindowAdvance,
    ModeSwitch,
    GapViolation,
    SpeedViolation,
    WindowViolation,
    FeasibilityFailure,
};

const char* to_string(EventKind k);

/// `value` carries the event payload: entry speed (spawn), dwell time (cross),
/// tau_j (merge), spacing (leader change, gap violation), speed, crossing time
/// (window violation) or the new window ordinal (window advance).
struct Event {
    double time = 0.0;
    EventKind kind = EventKind::Spawn;
    long vehicle = 0;
    int approach = 0;
    double value = 0.0;

    friend bool operator==(const Event&, const Event&) = default;
};

struct DwellRecord {
    long id = 0;
    VehicleKind kind = VehicleKind::Cav;
    int approach = 0;
    double entry = 0.0;
    double crossing = 0.0;

    double dwell() const { return crossing - entry; }
};

struct Counters {
    long gap_violations = 0;
    long speed_violations = 0;
    long window_violations = 0;
    long feasibility_failures = 0;
    long infeasible_resolved = 0;  // empty intersections cured by a window advance
    long committed_ticks = 0;  // CAV ticks past the point of no return in an open window
    long window_advances = 0;
    long mode_switches = 0;
    int max_switches_per_vehicle = 0;
    long merges = 0;
    long clamp_ticks = 0;
    long vehicle_ticks = 0;
    double min_spacing = cbf::kInf;

    long safety_violations() const { return gap_violations + speed_violations + window_violations; }
};

struct TraceRow {
    double time;
    const Vehicle* vehicle;
};

using AccelOverride = std::function<double(const Vehicle&, double now)>;

/// Fixed-step simulator of the four-way intersection. Each tick controllers
/// read the committed state of the previous tick, then all vehicles commit.
class World {
public:
    World(WorldConfig config, std::uint64_t seed);

    const WorldConfig& config() const noexcept { return config_; }
    const IntersectionTopology& topology() const noexcept { return topology_; }
    double now() const noexcept { return now_; }
    long ticks() const noexcept { return ticks_; }
    const std::vector<Vehicle>& vehicles() const noexcept { return vehicles_; }
    const std::vector<Event>& events() const noexcept { return events_; }
    const std::vector<DwellRecord>& dwell_records() const noexcept { return dwell_; }
    const Counters& counters() const noexcept { return counters_; }
    const Vehicle* find(long id) const;

    /// NaN when no vehicle crossed yet.
    double mean_dwell() const;

    void step();
    void run_until(double t_end);

    /// Nearest vehicle ahead along `v`'s path, including vehicles that merged
    /// onto a shared exit link. Positions are in `v`'s path coordinate.
    cbf::LeaderObservation resolve_leader(const Vehicle& v) const;

    /// Places a vehicle directly, bypassing arrivals and the entrance check.
    long add_vehicle(VehicleKind kind, int approach, Movement movement, double position,
                     double speed);

    /// Replaces the controller of one vehicle (scripted leaders in tests).
    void set_accel_override(long id, AccelOverride f);

    /// Called for every vehicle on every `stride`-th tick after the commit.
    void set_trace_sink(std::function<void(const TraceRow&)> sink, int stride = 1);

    /// Entrance spacing required before a vehicle entering at speed v0 spawns.
    double entrance_clearance(double v0) const;

private:
    struct Neighbor {
        long id = -1;
        std::size_t index = 0;
        double position = 0.0;  // in the follower's path coordinate
    };

    // With `merging`, vehicles of the other stream short of the merge point are
    // projected onto v's path.
    std::optional<Neighbor> find_leader(const Vehicle& v, bool merging = true) const;
    cbf::LeaderObservation observe(const Vehicle& leader, double position) const;
    void rebuild_index() const;
    planner::PlannerContext context(int approach) const;

    void decide_right_turns();
    double cav_control(Vehicle& v, const cbf::LeaderObservation& leader);
    double hdv_control(Vehicle& v, const std::optional<Neighbor>& leader);
    void commit();
    void spawn_arrivals();
    void check_safety();
    void remove_exited();

    long spawn(VehicleKind kind, int approach, Movement movement, double position, double speed);
    void log(EventKind kind, const Vehicle& v, double value, double time);

    WorldConfig config_;
    IntersectionTopology topology_;
    std::vector<ArrivalStream> arrivals_;
    std::array<std::vector<Arrival>, kApproachCount> backlog_;

    double now_ = 0.0;
    long ticks_ = 0;
    long next_id_ = 1;
    std::vector<Vehicle> vehicles_;
    std::vector<Event> events_;
    std::vector<DwellRecord> dwell_;
    Counters counters_;
    std::unordered_map<long, AccelOverride> overrides_;
    std::function<void(const TraceRow&)> trace_;
    int trace_stride_ = 1;

    // Per-link vehicle lists sorted by link offset: (offset, vehicle index).
    mutable std::array<std::vector<std::pair<double, std::size_t>>, kLinkCount> index_;
    mutable bool index_dirty_ = true;
};

}  // namespace mixtraffic::sim
