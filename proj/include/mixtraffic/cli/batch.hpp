#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mixtraffic/cli/config.hpp"
#include "mixtraffic/sim/world.hpp"

namespace mixtraffic::cli {

struct RunResult {
    std::size_t point = 0;
    std::string sweep_key;
    std::string sweep_value;
    std::uint64_t seed = 0;
    double mean_dwell = 0.0;  // NaN when nothing crossed
    long n_vehicles = 0;      // vehicles with a recorded dwell time
    sim::Counters counters;
    double max_dwell_error = 0.0;  // largest dwell below region_length / v_max
};

struct SummaryRow {
    std::string sweep_key;
    std::string sweep_value;
    double mean_dwell = 0.0;  // mean over seeds of the per-seed mean dwell
    double std_dwell = 0.0;   // sample standard deviation over seeds
    long n_vehicles = 0;
    long safety_violations = 0;
    long feasibility_failures = 0;
};

struct BatchOptions {
    std::optional<std::filesystem::path> out_dir;
    unsigned threads = 0;  // 0 picks the hardware concurrency
};

struct BatchResult {
    std::vector<RunResult> runs;  // ordered by (point, seed)
    std::vector<SummaryRow> summary;

    long safety_violations() const;
    long feasibility_failures() const;
};

/// Runs one seeded simulation. Writes trace and event CSVs when the stems are given.
RunResult run_single(const sim::WorldConfig& world, std::uint64_t seed, double duration,
                     int trace_stride, const std::optional<std::filesystem::path>& trace_csv,
                     const std::optional<std::filesystem::path>& events_csv);

/// Every (sweep point, seed) pair, in parallel. With an output directory the
/// batch writes summary.csv, runs.csv and per-run events/trace CSVs.
BatchResult run_batch(const ScenarioConfig& config, const BatchOptions& options = {});

std::vector<SummaryRow> summarize(const std::vector<RunResult>& runs);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

inline constexpr const char* kTraceHeader =
    "time_s,vehicle,kind,approach,movement,position_m,speed_mps,accel_cmd_mps2,accel_mps2,mode,"
    "active_bound";
inline constexpr const char* kEventsHeader = "time_s,event,vehicle,approach,value";
inline constexpr const char* kSummaryHeader =
    "sweep_key,sweep_value,mean_dwell_s,std_dwell_s,n_vehicles,safety_violations";

}  // namespace mixtraffic::cli
