#pragma once

#include <vector>

#include "mixtraffic/core/types.hpp"

namespace mixtraffic {

enum class SignalColor { Green, Red };

const char* to_string(SignalColor color);

struct SignalPhase {
    SignalColor color = SignalColor::Green;
    double duration = 0.0;  // s

    friend bool operator==(const SignalPhase&, const SignalPhase&) = default;
};

/// Fixed-time signal program for one approach. The phase list repeats forever
/// starting at `phase_offset`; adjacent green phases (including across the
/// cycle boundary) are fused into one crossing window.
class SignalSchedule {
public:
    SignalSchedule() = default;
    SignalSchedule(std::vector<SignalPhase> phases, double phase_offset);

    const std::vector<SignalPhase>& phases() const noexcept { return phases_; }
    double cycle_length() const noexcept { return cycle_; }
    double phase_offset() const noexcept { return offset_; }

    SignalColor color_at(double t) const;

    /// Green windows overlapping [now, now + horizon], clipped to that range and
    /// sorted chronologically. Empty when the horizon is all red.
    std::vector<CrossingWindow> green_windows(double now, double horizon) const;

    /// Full (unclipped) window with global ordinal k.
    CrossingWindow window(long k) const;

    /// Ordinal of the first window whose end lies strictly after t.
    long first_window_ending_after(double t) const;

    friend bool operator==(const SignalSchedule& a, const SignalSchedule& b) {
        return a.phases_ == b.phases_ && a.offset_ == b.offset_;
    }

private:
    struct Span {
        double begin;
        double end;
    };

    std::vector<SignalPhase> phases_;
    double offset_ = 0.0;
    double cycle_ = 0.0;
    // Green spans relative to the start of a cycle. The last span may run past
    // cycle_ when green wraps around into the next cycle.
    std::vector<Span> greens_;
};

}  // namespace mixtraffic
