#pragma once

#include <array>
#include <optional>

#include "mixtraffic/turn/merge.hpp"

namespace mixtraffic::sim {

inline constexpr int kApproachCount = 4;

/// Approaches are named after the side vehicles come from.
enum class Approach { North = 0, East = 1, South = 2, West = 3 };

const char* to_string(Approach a);

enum class Movement { Through, RightTurn };

const char* to_string(Movement m);

struct TopologyConfig {
    double region_length = 200.0;   // m, region entry to stop line
    double exit_length = 100.0;     // m, downstream link past the stop line
    double turn_arc_length = 15.0;  // m, stop line to the merge point of a right turn
    double conflict_offset = 20.0;  // m, merge point measured along the target exit link
    double sensing_range = 200.0;   // m, oncoming vehicles farther than this are ignored
    bool right_on_red = true;

    void validate() const;
    friend bool operator==(const TopologyConfig&, const TopologyConfig&) = default;
};

enum class LinkKind { Approach, Arc, Exit };

struct LinkId {
    LinkKind kind = LinkKind::Approach;
    int approach = 0;

    int index() const { return static_cast<int>(kind) * kApproachCount + approach; }
    friend bool operator==(const LinkId&, const LinkId&) = default;
};

inline constexpr int kLinkCount = 3 * kApproachCount;

/// Where a path coordinate lands on the link graph.
struct Location {
    LinkId link;
    double offset = 0.0;  // m from the start of the link
};

/// One stretch of a vehicle path. Path coordinate s in [s_begin, s_end) maps to
/// link offset link_offset + (s - s_begin).
struct PathSegment {
    LinkId link;
    double s_begin = 0.0;
    double s_end = 0.0;
    double link_offset = 0.0;
};

/// Four single-lane approaches. Through traffic from approach a continues on
/// Exit(a); right turns from a run along Arc(a) and join Exit(a + 1) at
/// conflict_offset, so they share the exit with the through stream of a + 1.
class IntersectionTopology {
public:
    explicit IntersectionTopology(TopologyConfig config = {});

    const TopologyConfig& config() const noexcept { return config_; }
    double stop_line() const noexcept { return config_.region_length; }

    static int right_turn_target(int approach) { return (approach + 1) % kApproachCount; }

    /// Through approach whose stream a right turn from `approach` has to merge into.
    static int oncoming_for(int approach) { return right_turn_target(approach); }

    double path_length(Movement m) const;
    std::array<PathSegment, 3> path(int approach, Movement m) const;
    int path_segments(Movement m) const { return m == Movement::Through ? 2 : 3; }
    Location locate(int approach, Movement m, double s) const;

    /// Path coordinate of the merge point for the oncoming through stream.
    double conflict_position() const { return stop_line() + config_.conflict_offset; }

    /// Conflict geometry for a right turn from rest `delta_p` short of the stop
    /// line against an oncoming through vehicle at path coordinate s_oncoming.
    turn::ConflictPoint conflict(double delta_p, std::optional<double> s_oncoming,
                                 std::optional<double> v_oncoming) const;

private:
    TopologyConfig config_;
};

}  // namespace mixtraffic::sim
