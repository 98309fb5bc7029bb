#include "mixtraffic/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixtraffic/turn/merge.hpp"

namespace mixtraffic::sim {

const char* to_string(LeaderAccelPolicy p) {
    switch (p) {
        case LeaderAccelPolicy::ConstantAccel: return "constant_accel";
        case LeaderAccelPolicy::BrakingOnly: return "braking_only";
        case LeaderAccelPolicy::Robust: return "robust";
    }
    return "?";
}

std::optional<LeaderAccelPolicy> parse_leader_accel_policy(const std::string& s) {
    if (s == "constant_accel") return LeaderAccelPolicy::ConstantAccel;
    if (s == "braking_only") return LeaderAccelPolicy::BrakingOnly;
    if (s == "robust") return LeaderAccelPolicy::Robust;
    return std::nullopt;
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Spawn: return "spawn";
        case EventKind::Cross: return "cross";
        case EventKind::Exit: return "exit";
        case EventKind::Merge: return "merge";
        case EventKind::LeaderChange: return "leader_change";
        case EventKind::WindowAdvance: return "window_advance";
        case EventKind::ModeSwitch: return "mode_switch";
        case EventKind::GapViolation: return "gap_violation";
        case EventKind::SpeedViolation: return "speed_violation";
        case EventKind::WindowViolation: return "window_violation";
        case EventKind::FeasibilityFailure: return "feasibility_failure";
    }
    return "?";
}

std::array<SignalSchedule, kApproachCount> WorldConfig::default_signals() {
    // 90 s cycle, 3 s all-red between the two streets.
    const std::vector<SignalPhase> phases{{SignalColor::Green, 42.0}, {SignalColor::Red, 48.0}};
    const SignalSchedule ns(phases, 0.0);
    const SignalSchedule ew(phases, 45.0);
    return {ns, ew, ns, ew};
}

void WorldConfig::validate() const {
    const auto section = [](const char* name, const auto& part) {
        try {
            part.validate();
        } catch (const ConfigError& e) {
            throw e.nested(name);
        }
    };
    section("limits", limits);
    section("gains", gains);
    idm.validate();
    topology.validate();
    traffic.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("run.dt_s", "must be > 0");
    if (idm.gamma != limits.gamma)
        throw ConfigError("idm.gamma_m", "must equal limits.gamma_m");
    for (const auto& s : signals)
        if (s.cycle_length() <= 0.0) throw ConfigError("signals", "every approach needs a program");
}

World::World(WorldConfig config, std::uint64_t seed)
    : config_(std::move(config)), topology_(config_.topology) {
    config_.validate();
    for (int a = 0; a < kApproachCount; ++a) arrivals_.emplace_back(seed, a, config_.traffic);
}

const Vehicle* World::find(long id) const {
    for (const auto& v : vehicles_)
        if (v.id == id) return &v;
    return nullptr;
}

double World::mean_dwell() const {
    if (dwell_.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (const auto& r : dwell_) sum += r.dwell();
    return sum / static_cast<double>(dwell_.size());
}

planner::PlannerContext World::context(int approach) const {
    planner::PlannerContext ctx;
    ctx.schedule = &config_.signals[approach];
    ctx.gains = config_.gains;
    ctx.limits = config_.limits;
    ctx.stop_line = topology_.stop_line();
    ctx.revalidation_tolerance = config_.dt;
    ctx.dt = config_.dt;
    return ctx;
}

double World::entrance_clearance(double v0) const {
    const double u = config_.limits.u_max;
    return config_.limits.gamma + v0 * v0 / (2.0 * u) + 2.0 * v0 * config_.dt + 1.0;
}

void World::log(EventKind kind, const Vehicle& v, double value, double time) {
    events_.push_back({time, kind, v.id, v.approach, value});
}

long World::spawn(VehicleKind kind, int approach, Movement movement, double position,
                  double speed) {
    Vehicle v;
    v.id = next_id_++;
    v.kind = kind;
    v.approach = approach;
    v.movement = movement;
    v.state = {position, speed, 0.0};
    v.entered_at = now_;
    if (kind == VehicleKind::Cav && position < topology_.stop_line()) {
        try {
            v.planner = planner::enter_region(v.state, context(approach), now_);
        } catch (const planner::FeasibilityError&) {
            ++counters_.feasibility_failures;
            log(EventKind::FeasibilityFailure, v, position, now_);
            v.planner.crossed = true;
        }
    }
    log(EventKind::Spawn, v, speed, now_);
    vehicles_.push_back(v);
    index_dirty_ = true;
    return v.id;
}

long World::add_vehicle(VehicleKind kind, int approach, Movement movement, double position,
                        double speed) {
    if (approach < 0 || approach >= kApproachCount)
        throw std::invalid_argument("add_vehicle: approach out of range");
    return spawn(kind, approach, movement, position, speed);
}

void World::set_accel_override(long id, AccelOverride f) { overrides_[id] = std::move(f); }

void World::set_trace_sink(std::function<void(const TraceRow&)> sink, int stride) {
    trace_ = std::move(sink);
    trace_stride_ = std::max(stride, 1);
}

void World::rebuild_index() const {
    for (auto& bucket : index_) bucket.clear();
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
        const auto& v = vehicles_[i];
        const Location loc = topology_.locate(v.approach, v.movement, v.state.position);
        index_[loc.link.index()].emplace_back(loc.offset, i);
    }
    for (auto& bucket : index_) std::sort(bucket.begin(), bucket.end());
    index_dirty_ = false;
}

std::optional<World::Neighbor> World::find_leader(const Vehicle& v, bool merging) const {
    if (index_dirty_) rebuild_index();
    const auto segs = topology_.path(v.approach, v.movement);
    const int n = topology_.path_segments(v.movement);
    const double s = v.state.position;

    int first = n - 1;
    for (int i = 0; i < n; ++i)
        if (s < segs[i].s_end) {
            first = i;
            break;
        }

    std::optional<Neighbor> best;
    for (int j = first; j < n; ++j) {
        const PathSegment& seg = segs[j];
        const double seg_end = seg.link_offset + (seg.s_end - seg.s_begin);
        const double from = j == first ? seg.link_offset + (s - seg.s_begin) : seg.link_offset;
        const auto& bucket = index_[seg.link.index()];
        auto it = std::lower_bound(bucket.begin(), bucket.end(),
                                   std::make_pair(from, std::size_t{0}));
        for (; it != bucket.end(); ++it) {
            const double offset = it->first;
            if (offset >= seg_end && j < n - 1) break;
            const Vehicle& other = vehicles_[it->second];
            if (other.id == v.id) continue;
            // Equal positions: the older vehicle leads.
            if (j == first && offset == from && other.id > v.id) continue;
            best = Neighbor{other.id, it->second, seg.s_begin + (offset - seg.link_offset)};
            break;
        }
        if (best) break;
    }

    // The other stream feeding the same exit, still short of the merge point,
    // is projected onto this path by its distance to go along the shared exit.
    const PathSegment& exit = segs[n - 1];
    const double c = config_.topology.conflict_offset;
    const double e_v = s - exit.s_begin + exit.link_offset;
    if (merging && e_v < c) {
        const bool through = v.movement == Movement::Through;
        const int exit_approach = exit.link.approach;
        const LinkId feeder =
            through ? LinkId{LinkKind::Arc, (exit_approach + kApproachCount - 1) % kApproachCount}
                    : LinkId{LinkKind::Exit, exit_approach};
        const double arc = config_.topology.turn_arc_length;
        for (const auto& [offset, index] : index_[feeder.index()]) {
            // Exit coordinate of the candidate.
            const double e_o = through ? offset - arc + c : offset;
            if (e_o >= c) break;
            if (e_o < e_v || (e_o == e_v && vehicles_[index].id > v.id)) continue;
            const double position = s + (e_o - e_v);
            if (!best || position < best->position)
                best = Neighbor{vehicles_[index].id, index, position};
            break;
        }
    }
    return best;
}

cbf::LeaderObservation World::observe(const Vehicle& leader, double position) const {
    double accel = leader.state.accel_applied;
    switch (config_.hdv_leader_accel) {
        case LeaderAccelPolicy::ConstantAccel: break;
        case LeaderAccelPolicy::BrakingOnly: accel = std::min(accel, 0.0); break;
        case LeaderAccelPolicy::Robust:
            accel = leader.kind == VehicleKind::Hdv ? -config_.limits.u_max : std::min(accel, 0.0);
            break;
    }
    return cbf::LeaderObservation::at(position, leader.state.speed, accel);
}

cbf::LeaderObservation World::resolve_leader(const Vehicle& v) const {
    const auto nb = find_leader(v);
    if (!nb) return cbf::LeaderObservation::none();
    return observe(vehicles_[nb->index], nb->position);
}

void World::decide_right_turns() {
    if (!config_.topology.right_on_red) return;
    const double p_tr = topology_.stop_line();
    const double conflict = topology_.conflict_position();
    for (auto& v : vehicles_) {
        if (v.movement != Movement::RightTurn || v.merge_permitted || v.crossed_at) continue;
        const double delta_p = p_tr - v.state.position;
        if (!(delta_p > 0.0 && delta_p < 1.0 && v.state.speed < 0.1)) continue;
        if (config_.signals[v.approach].color_at(now_) != SignalColor::Red) continue;

        const int b = IntersectionTopology::oncoming_for(v.approach);
        const Vehicle* oncoming = nullptr;
        for (const auto& o : vehicles_) {
            if (o.approach != b || o.movement != Movement::Through) continue;
            const double d_i = conflict - o.state.position;
            if (d_i <= 0.0 || d_i > config_.topology.sensing_range) continue;
            if (!oncoming || o.state.position > oncoming->state.position) oncoming = &o;
        }

        std::optional<double> s_o, v_o;
        if (oncoming) {
            s_o = oncoming->state.position;
            v_o = std::clamp(oncoming->state.speed, 0.0, config_.limits.v_max);
        }
        const turn::ConflictPoint cp = topology_.conflict(delta_p, s_o, v_o);
        const double v_des =
            v.kind == VehicleKind::Cav ? config_.limits.v_des : config_.idm.v_des;
        const double tau_j = turn::solve_tau_j(cp.d_j, v_des, config_.gains.phi);
        std::optional<double> tau_i;
        if (cp.oncoming_v)
            tau_i = turn::tau_i_headway(*cp.oncoming_v, cp.d_i, config_.limits.u_max,
                                        config_.limits.v_max);
        if (turn::can_merge(tau_j, tau_i, config_.gains.tau_s)) {
            v.merge_permitted = true;
            v.planner.merge_permitted = true;
            ++counters_.merges;
            log(EventKind::Merge, v, tau_j, now_);
        }
    }
}

double World::cav_control(Vehicle& v, const cbf::LeaderObservation& leader) {
    const auto ctx = context(v.approach);
    planner::TickOutput out;
    try {
        out = planner::cav_tick(v.state, v.planner, leader, ctx, now_);
    } catch (const planner::FeasibilityError&) {
        ++counters_.feasibility_failures;
        log(EventKind::FeasibilityFailure, v, v.state.position, now_);
        planner::CavPlannerState released = v.planner;
        released.crossed = true;
        out = planner::cav_tick(v.state, released, leader, ctx, now_);
        out.planner = v.planner;
    }
    counters_.infeasible_resolved += out.infeasible;
    counters_.committed_ticks += out.committed ? 1 : 0;
    counters_.window_advances += out.advances;
    if (out.advances > 0)
        log(EventKind::WindowAdvance, v, static_cast<double>(out.planner.window.k), now_);
    if (out.planner.switch_count > v.planner.switch_count) {
        counters_.mode_switches += out.planner.switch_count - v.planner.switch_count;
        log(EventKind::ModeSwitch, v, static_cast<double>(out.planner.switch_count), now_);
    }
    counters_.max_switches_per_vehicle =
        std::max(counters_.max_switches_per_vehicle, out.planner.switch_count);
    v.planner = out.planner;
    v.active = out.active;
    return out.accel;
}

double World::hdv_control(Vehicle& v, const std::optional<Neighbor>& leader) {
    const double u_max = config_.limits.u_max;
    const double speed = v.state.speed;
    double accel = hdv::idm_accel(speed, 0.0, cbf::kInf, config_.idm, u_max);
    if (leader) {
        const Vehicle& l = vehicles_[leader->index];
        accel = hdv::idm_accel(speed, speed - l.state.speed, leader->position - v.state.position,
                               config_.idm, u_max);
    }

    const double delta_p = topology_.stop_line() - v.state.position;
    if (delta_p <= 0.0 || v.merge_permitted) return accel;
    if (config_.signals[v.approach].color_at(now_) == SignalColor::Red) {
        if (!v.red_decided) {
            v.red_decided = true;
            v.red_commit = speed * speed / (2.0 * u_max) > delta_p;
        }
        if (!v.red_commit) {
            const double stop =
                hdv::idm_accel(speed, speed, delta_p + config_.limits.gamma, config_.idm, u_max);
            accel = std::min(accel, stop);
        }
    } else {
        v.red_decided = false;
        v.red_commit = false;
    }
    return accel;
}

void World::commit() {
    const double dt = config_.dt;
    const double v_max = config_.limits.v_max;
    const double p_tr = topology_.stop_line();
    for (auto& v : vehicles_) {
        const double p_old = v.state.position;
        const double v_old = v.state.speed;
        const double raw = v_old + v.accel_cmd * dt;
        const double v_new = std::clamp(raw, config_.limits.v_min, v_max);
        if (v_new != raw) ++counters_.clamp_ticks;
        ++counters_.vehicle_ticks;
        v.state.speed = v_new;
        v.state.position = p_old + v_new * dt;
        v.state.accel_applied = (v_new - v_old) / dt;

        if (!v.crossed_at && p_old < p_tr && v.state.position >= p_tr) {
            const double t = now_ + dt * (p_tr - p_old) / (v.state.position - p_old);
            v.crossed_at = t;
            dwell_.push_back({v.id, v.kind, v.approach, v.entered_at, t});
            log(EventKind::Cross, v, t - v.entered_at, t);
            if (v.kind == VehicleKind::Cav) {
                v.planner.crossed = true;
                const CrossingWindow& w = v.planner.window;
                if (!v.merge_permitted && (t < w.t_lower - dt || t > w.t_upper + dt)) {
                    ++counters_.window_violations;
                    log(EventKind::WindowViolation, v, t, t);
                }
            }
        }
    }
    index_dirty_ = true;
}

void World::spawn_arrivals() {
    for (int a = 0; a < kApproachCount; ++a) {
        auto& stream = arrivals_[a];
        while (stream.peek().time <= now_) backlog_[a].push_back(stream.pop());
        if (backlog_[a].empty()) continue;

        const Arrival& next = backlog_[a].front();
        const double v0 =
            next.kind == VehicleKind::Cav ? config_.limits.v_des : config_.idm.v_des;
        double last = cbf::kInf;
        for (const auto& v : vehicles_)
            if (v.approach == a && v.state.position < last) last = v.state.position;
        if (last < entrance_clearance(v0)) continue;

        spawn(next.kind, a, next.movement, 0.0, v0);
        backlog_[a].erase(backlog_[a].begin());
    }
}

void World::check_safety() {
    const double gamma = config_.limits.gamma;
    const double v_max = config_.limits.v_max;
    for (auto& v : vehicles_) {
        if (v.state.speed < -kSpeedTolerance || v.state.speed > v_max + kSpeedTolerance) {
            ++counters_.speed_violations;
            log(EventKind::SpeedViolation, v, v.state.speed, now_);
        }
        // Gaps are judged on the shared lane only; a projected merging vehicle
        // is not yet physically ahead.
        const auto nb = find_leader(v, false);
        const long id = nb ? nb->id : -1;
        if (!nb) {
            v.in_violation = false;
        } else {
            const double spacing = nb->position - v.state.position;
            counters_.min_spacing = std::min(counters_.min_spacing, spacing);
            if (id != v.leader_id) log(EventKind::LeaderChange, v, spacing, now_);
            const bool violating = spacing < gamma - kGapTolerance;
            if (violating && !v.in_violation) {
                ++counters_.gap_violations;
                log(EventKind::GapViolation, v, spacing, now_);
            }
            v.in_violation = violating;
        }
        v.leader_id = id;
    }
}

void World::remove_exited() {
    const auto gone = [&](const Vehicle& v) {
        if (v.state.position < topology_.path_length(v.movement)) return false;
        log(EventKind::Exit, v, v.state.position, now_);
        overrides_.erase(v.id);
        return true;
    };
    const auto it = std::remove_if(vehicles_.begin(), vehicles_.end(), gone);
    if (it != vehicles_.end()) {
        vehicles_.erase(it, vehicles_.end());
        index_dirty_ = true;
    }
}

void World::step() {
    rebuild_index();
    decide_right_turns();

    // Every controller reads the snapshot; commands are applied afterwards.
    for (auto& v : vehicles_) {
        const auto nb = find_leader(v);
        if (auto ov = overrides_.find(v.id); ov != overrides_.end()) {
            v.accel_cmd = ov->second(v, now_);
        } else if (v.kind == VehicleKind::Cav) {
            const auto obs = nb ? observe(vehicles_[nb->index], nb->position)
                                : cbf::LeaderObservation::none();
            v.accel_cmd = cav_control(v, obs);
        } else {
            v.accel_cmd = hdv_control(v, nb);
        }
    }

    commit();
    ++ticks_;
    now_ = static_cast<double>(ticks_) * config_.dt;
    remove_exited();
    spawn_arrivals();
    check_safety();

    if (trace_ && ticks_ % trace_stride_ == 0)
        for (const auto& v : vehicles_) trace_({now_, &v});
}

void World::run_until(double t_end) {
    while (now_ + 0.5 * config_.dt < t_end) step();
}

}  // namespace mixtraffic::sim
