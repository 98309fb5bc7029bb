#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mixtraffic {

/// Longitudinal state of one vehicle along its fixed path.
struct VehicleState {
    double position = 0.0;       // m
    double speed = 0.0;          // m/s
    double accel_applied = 0.0;  // m/s^2, effective acceleration of the last tick
};

enum class VehicleKind { Cav, Hdv };

const char* to_string(VehicleKind kind);

/// Raised when a configuration value violates its invariant. `field` names the
/// offending key so callers can print a targeted diagnostic.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)), message_(message) {}

    const std::string& field() const noexcept { return field_; }
    const std::string& message() const noexcept { return message_; }

    /// Same error with `prefix.` prepended to the field path.
    ConfigError nested(const std::string& prefix) const {
        return ConfigError(prefix + "." + field_, message_);
    }

private:
    std::string field_;
    std::string message_;
};

struct LimitsConfig {
    double u_max = 5.0;   // m/s^2
    double v_max = 22.0;  // m/s
    double v_min = 0.0;   // m/s, fixed at zero
    double gamma = 5.0;   // m, standstill distance
    double v_des = 12.0;  // m/s

    void validate() const;
};

struct GainsConfig {
    double phi = 0.25;         // 1/s, reference-law gain
    double kappa_s = 1000.0;   // 1/s, speed barrier
    double kappa_T = 0.04;     // 1/s, crossing-time barrier
    double kappa_R = 0.2;      // 1/s, rear-end barrier
    double kappa_imag = 0.05;  // 1/s, virtual stopped vehicle at the stop line
    double tau_s = 1.5;        // s, merge safety margin

    void validate() const;
};

/// One green interval of a signal program. `k` is the global ordinal of the
/// window counted from the schedule origin, so it increases monotonically in time.
struct CrossingWindow {
    long k = 0;
    double t_lower = 0.0;
    double t_upper = 0.0;

    double delta_t1(double now) const { return t_lower - now; }
    double delta_t2(double now) const { return t_upper - now; }

    friend bool operator==(const CrossingWindow&, const CrossingWindow&) = default;
};

}  // namespace mixtraffic
