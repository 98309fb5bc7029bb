#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mixtraffic/sim/world.hpp"

namespace mixtraffic::cli {

struct RunSettings {
    double duration = 300.0;  // s
    std::vector<std::uint64_t> seeds{1};
    int trace_stride = 0;  // ticks between trace rows, 0 disables traces

    friend bool operator==(const RunSettings&, const RunSettings&) = default;
};

/// One sweep axis. Scalar keys carry one number per point; `gain_triple`
/// carries [kappa_R, kappa_T, kappa_imag].
struct SweepAxis {
    std::string key;
    std::vector<std::vector<double>> values;

    friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

struct ScenarioConfig {
    sim::WorldConfig world;
    RunSettings run;
    std::optional<SweepAxis> sweep;

    void validate() const;
};

struct SweepPoint {
    std::string key;    // empty without a sweep
    std::string value;  // printable label of the point
    sim::WorldConfig world;
};

/// Keys accepted in `sweep.key`.
const std::vector<std::string>& sweep_keys();

/// Parses JSON text. Syntax errors report the line; value errors raise
/// ConfigError naming the dotted field path.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ScenarioConfig& config);
std::string serialize_config(const ScenarioConfig& config);

/// Applies `value` for `key` to a copy of `base`.
sim::WorldConfig apply_sweep_value(const sim::WorldConfig& base, const std::string& key,
                                   const std::vector<double>& value);

std::vector<SweepPoint> expand_sweep(const ScenarioConfig& config);

}  // namespace mixtraffic::cli
