#include "mixtraffic/sim/topology.hpp"

#include "mixtraffic/core/types.hpp"

namespace mixtraffic::sim {

const char* to_string(Approach a) {
    switch (a) {
        case Approach::North: return "N";
        case Approach::East: return "E";
        case Approach::South: return "S";
        case Approach::West: return "W";
    }
    return "?";
}

const char* to_string(Movement m) { return m == Movement::Through ? "through" : "right"; }

void TopologyConfig::validate() const {
    if (!(region_length > 0.0)) throw ConfigError("topology.region_length_m", "must be > 0");
    if (!(exit_length > 0.0)) throw ConfigError("topology.exit_length_m", "must be > 0");
    if (!(turn_arc_length > 0.0)) throw ConfigError("topology.turn_arc_length_m", "must be > 0");
    if (!(conflict_offset >= 0.0 && conflict_offset < exit_length))
        throw ConfigError("topology.conflict_offset_m", "must lie in [0, exit_length_m)");
    if (!(sensing_range > 0.0)) throw ConfigError("topology.sensing_range_m", "must be > 0");
}

IntersectionTopology::IntersectionTopology(TopologyConfig config) : config_(config) {
    config_.validate();
}

double IntersectionTopology::path_length(Movement m) const {
    const double tail = m == Movement::Through
                            ? config_.exit_length
                            : config_.turn_arc_length + config_.exit_length - config_.conflict_offset;
    return stop_line() + tail;
}

std::array<PathSegment, 3> IntersectionTopology::path(int approach, Movement m) const {
    const double p_tr = stop_line();
    std::array<PathSegment, 3> out{};
    out[0] = {{LinkKind::Approach, approach}, 0.0, p_tr, 0.0};
    if (m == Movement::Through) {
        out[1] = {{LinkKind::Exit, approach}, p_tr, p_tr + config_.exit_length, 0.0};
        return out;
    }
    const double arc_end = p_tr + config_.turn_arc_length;
    out[1] = {{LinkKind::Arc, approach}, p_tr, arc_end, 0.0};
    out[2] = {{LinkKind::Exit, right_turn_target(approach)}, arc_end, path_length(m),
              config_.conflict_offset};
    return out;
}

Location IntersectionTopology::locate(int approach, Movement m, double s) const {
    const auto segs = path(approach, m);
    const int n = path_segments(m);
    for (int i = 0; i < n; ++i)
        if (s < segs[i].s_end || i == n - 1)
            return {segs[i].link, segs[i].link_offset + (s - segs[i].s_begin)};
    return {};
}

turn::ConflictPoint IntersectionTopology::conflict(double delta_p, std::optional<double> s_oncoming,
                                                   std::optional<double> v_oncoming) const {
    turn::ConflictPoint cp;
    cp.d_j = config_.turn_arc_length + delta_p;
    if (s_oncoming && v_oncoming) {
        cp.d_i = conflict_position() - *s_oncoming;
        cp.oncoming_v = *v_oncoming;
    }
    return cp;
}

}  // namespace mixtraffic::sim
