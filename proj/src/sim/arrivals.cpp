#include "mixtraffic/sim/arrivals.hpp"

#include <cmath>

namespace mixtraffic::sim {

void TrafficConfig::validate() const {
    if (!(arrival_rate_vph >= 0.0) || !std::isfinite(arrival_rate_vph))
        throw ConfigError("traffic.arrival_rate_vph", "must be finite and >= 0");
    if (!(cav_fraction >= 0.0 && cav_fraction <= 1.0))
        throw ConfigError("traffic.cav_fraction", "must lie in [0, 1]");
    if (!(right_turn_fraction >= 0.0 && right_turn_fraction <= 1.0))
        throw ConfigError("traffic.right_turn_fraction", "must lie in [0, 1]");
}

ArrivalStream::ArrivalStream(std::uint64_t seed, int approach, const TrafficConfig& traffic)
    : rate_(traffic.arrival_rate_vph / kApproachCount / 3600.0),
      cav_fraction_(traffic.cav_fraction),
      right_fraction_(traffic.right_turn_fraction) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(approach)};
    rng_.seed(seq);
    draw_next(0.0);
}

double ArrivalStream::uniform() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

double ArrivalStream::exponential(double rate) {
    return -std::log1p(-uniform()) / rate;
}

void ArrivalStream::draw_next(double after) {
    if (!(rate_ > 0.0)) {
        next_ = {kNever, VehicleKind::Hdv, Movement::Through};
        return;
    }
    next_.time = after + exponential(rate_);
    next_.kind = uniform() < cav_fraction_ ? VehicleKind::Cav : VehicleKind::Hdv;
    next_.movement = uniform() < right_fraction_ ? Movement::RightTurn : Movement::Through;
}

Arrival ArrivalStream::pop() {
    const Arrival out = next_;
    draw_next(out.time);
    return out;
}

}  // namespace mixtraffic::sim
