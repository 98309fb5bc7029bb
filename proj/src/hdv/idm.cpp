#include "mixtraffic/hdv/idm.hpp"

#include <algorithm>
#include <cmath>

namespace mixtraffic::hdv {

void IdmParams::validate() const {
    if (!(v_des > 0.0)) throw ConfigError("idm.v_des_mps", "must be > 0");
    if (!(xi > 0.0)) throw ConfigError("idm.xi", "must be > 0");
    if (!(T_headway > 0.0)) throw ConfigError("idm.T_headway_s", "must be > 0");
    if (!(beta > 0.0)) throw ConfigError("idm.beta_mps2", "must be > 0");
    if (!(gamma > 0.0)) throw ConfigError("idm.gamma_m", "must be > 0");
}

double desired_gap(double v, double delta_v, const IdmParams& params, double u_max) {
    return params.gamma + v * params.T_headway +
           v * delta_v / (2.0 * std::sqrt(u_max * params.beta));
}

double idm_accel(double v, double delta_v, double gap, const IdmParams& params, double u_max) {
    if (gap <= 0.0) return -u_max;
    const double free_term = std::pow(std::max(v, 0.0) / params.v_des, params.xi);
    double interaction = 0.0;
    if (std::isfinite(gap)) {
        // A negative s* (fast-approaching leader pulling away) adds no braking.
        const double s_star = std::max(desired_gap(v, delta_v, params, u_max), 0.0);
        const double ratio = s_star / std::max(gap, kIdmGapFloor);
        interaction = ratio * ratio;
    }
    const double accel = u_max * (1.0 - free_term - interaction);
    return std::clamp(accel, -u_max, u_max);
}

}  // namespace mixtraffic::hdv
