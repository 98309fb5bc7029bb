#pragma once

#include <cstdint>
#include <random>

#include "mixtraffic/core/types.hpp"
#include "mixtraffic/sim/topology.hpp"

namespace mixtraffic::sim {

struct TrafficConfig {
    double arrival_rate_vph = 5000.0;  // veh/h over all approaches, split equally
    double cav_fraction = 0.4;
    double right_turn_fraction = 0.2;

    void validate() const;
    friend bool operator==(const TrafficConfig&, const TrafficConfig&) = default;
};

struct Arrival {
    double time = 0.0;  // s, when the vehicle reaches the region entrance
    VehicleKind kind = VehicleKind::Cav;
    Movement movement = Movement::Through;
};

/// Poisson arrival stream for one approach. Uniforms come straight from the
/// 53 high bits of a 64-bit Mersenne Twister so draws are identical on every
/// standard library.
class ArrivalStream {
public:
    ArrivalStream(std::uint64_t seed, int approach, const TrafficConfig& traffic);

    /// Mean interarrival time in seconds (+inf at zero rate).
    double mean_headway() const noexcept { return rate_ > 0.0 ? 1.0 / rate_ : kNever; }

    /// Next arrival; time is +inf when the stream is empty.
    const Arrival& peek() const noexcept { return next_; }
    Arrival pop();

    double uniform();
    double exponential(double rate);

    static constexpr double kNever = 1e300;

private:
    void draw_next(double after);

    std::mt19937_64 rng_;
    double rate_;  // veh/s
    double cav_fraction_;
    double right_fraction_;
    Arrival next_;
};

}  // namespace mixtraffic::sim
