#include "mixtraffic/core/types.hpp"

namespace mixtraffic {

const char* to_string(VehicleKind kind) {
    return kind == VehicleKind::Cav ? "CAV" : "HDV";
}

void LimitsConfig::validate() const {
    if (!(u_max > 0.0)) throw ConfigError("u_max_mps2", "must be > 0");
    if (v_min != 0.0) throw ConfigError("v_min_mps", "must be 0");
    if (!(v_des > v_min)) throw ConfigError("v_des_mps", "must be > v_min");
    if (!(v_max >= v_des)) throw ConfigError("v_max_mps", "must be >= v_des");
    if (!(gamma > 0.0)) throw ConfigError("gamma_m", "must be > 0");
}

void GainsConfig::validate() const {
    auto positive = [](double value, const char* field) {
        if (!(value > 0.0)) throw ConfigError(field, "must be > 0");
    };
    positive(phi, "phi_per_s");
    positive(kappa_s, "kappa_s_per_s");
    positive(kappa_T, "kappa_T_per_s");
    positive(kappa_R, "kappa_R_per_s");
    positive(kappa_imag, "kappa_imag_per_s");
    positive(tau_s, "tau_s_s");
}

}  // namespace mixtraffic
