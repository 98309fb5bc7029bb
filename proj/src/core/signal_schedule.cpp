#include "mixtraffic/core/signal_schedule.hpp"

#include <algorithm>
#include <cmath>

namespace mixtraffic {

namespace {

long floor_div(long a, long b) {
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

const char* to_string(SignalColor color) {
    return color == SignalColor::Green ? "green" : "red";
}

SignalSchedule::SignalSchedule(std::vector<SignalPhase> phases, double phase_offset)
    : phases_(std::move(phases)), offset_(phase_offset) {
    if (phases_.empty()) throw ConfigError("phases", "must not be empty");
    bool has_green = false;
    bool has_red = false;
    for (const auto& phase : phases_) {
        if (!(phase.duration > 0.0) || !std::isfinite(phase.duration))
            throw ConfigError("duration_s", "phase durations must be finite and > 0");
        has_green |= phase.color == SignalColor::Green;
        has_red |= phase.color == SignalColor::Red;
        cycle_ += phase.duration;
    }
    if (!has_green) throw ConfigError("phases", "schedule needs at least one green phase");
    if (!has_red) throw ConfigError("phases", "schedule needs at least one red phase");
    if (!std::isfinite(offset_)) throw ConfigError("phase_offset_s", "must be finite");

    double t = 0.0;
    for (const auto& phase : phases_) {
        if (phase.color == SignalColor::Green) {
            if (!greens_.empty() && greens_.back().end == t)
                greens_.back().end = t + phase.duration;
            else
                greens_.push_back({t, t + phase.duration});
        }
        t += phase.duration;
    }
    // Green at both ends of the list is a single window spanning the cycle boundary.
    if (greens_.size() > 1 && greens_.front().begin == 0.0 && greens_.back().end == cycle_) {
        greens_.back().end = cycle_ + greens_.front().end;
        greens_.erase(greens_.begin());
    }
}

SignalColor SignalSchedule::color_at(double t) const {
    double tau = std::fmod(t - offset_, cycle_);
    if (tau < 0.0) tau += cycle_;
    double acc = 0.0;
    for (const auto& phase : phases_) {
        acc += phase.duration;
        if (tau < acc) return phase.color;
    }
    return phases_.back().color;
}

CrossingWindow SignalSchedule::window(long k) const {
    const long m = static_cast<long>(greens_.size());
    const long n = floor_div(k, m);
    const long j = k - n * m;
    const double base = offset_ + static_cast<double>(n) * cycle_;
    return {k, base + greens_[j].begin, base + greens_[j].end};
}

long SignalSchedule::first_window_ending_after(double t) const {
    const long m = static_cast<long>(greens_.size());
    const long n = static_cast<long>(std::floor((t - offset_) / cycle_));
    long k = (n - 1) * m;
    while (window(k).t_upper <= t) ++k;
    return k;
}

std::vector<CrossingWindow> SignalSchedule::green_windows(double now, double horizon) const {
    std::vector<CrossingWindow> out;
    const double end = now + horizon;
    for (long k = first_window_ending_after(now);; ++k) {
        CrossingWindow w = window(k);
        if (w.t_lower >= end) break;
        w.t_lower = std::max(w.t_lower, now);
        w.t_upper = std::min(w.t_upper, end);
        if (w.t_upper > w.t_lower) out.push_back(w);
    }
    return out;
}

}  // namespace mixtraffic
