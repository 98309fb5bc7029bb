#include "mixtraffic/cli/batch.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace mixtraffic::cli {

namespace {

std::ofstream open_csv(const std::filesystem::path& path, const char* header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(17) << header << '\n';
    return out;
}

std::string mode_of(const sim::Vehicle& v) {
    if (v.kind == VehicleKind::Hdv) return v.red_decided && !v.red_commit ? "idm_red" : "idm";
    if (v.merge_permitted) return "right_on_red";
    if (v.planner.crossed) return "crossed";
    return planner::to_string(v.planner.mode);
}

std::string run_stem(std::size_t point, std::uint64_t seed) {
    return "p" + std::to_string(point) + "_seed" + std::to_string(seed);
}

}  // namespace

long BatchResult::safety_violations() const {
    long n = 0;
    for (const auto& r : runs) n += r.counters.safety_violations();
    return n;
}

long BatchResult::feasibility_failures() const {
    long n = 0;
    for (const auto& r : runs) n += r.counters.feasibility_failures;
    return n;
}

RunResult run_single(const sim::WorldConfig& world_cfg, std::uint64_t seed, double duration,
                     int trace_stride, const std::optional<std::filesystem::path>& trace_csv,
                     const std::optional<std::filesystem::path>& events_csv) {
    sim::World world(world_cfg, seed);

    std::ofstream trace;
    if (trace_csv && trace_stride > 0) {
        trace = open_csv(*trace_csv, kTraceHeader);
        world.set_trace_sink(
            [&](const sim::TraceRow& row) {
                const sim::Vehicle& v = *row.vehicle;
                trace << row.time << ',' << v.id << ',' << to_string(v.kind) << ','
                      << sim::to_string(static_cast<sim::Approach>(v.approach)) << ','
                      << sim::to_string(v.movement) << ',' << v.state.position << ','
                      << v.state.speed << ',' << v.accel_cmd << ',' << v.state.accel_applied
                      << ',' << mode_of(v) << ','
                      << (v.kind == VehicleKind::Cav ? planner::to_string(v.active) : "-")
                      << '\n';
            },
            trace_stride);
    }
    world.run_until(duration);

    if (events_csv) {
        auto out = open_csv(*events_csv, kEventsHeader);
        for (const auto& e : world.events())
            out << e.time << ',' << sim::to_string(e.kind) << ',' << e.vehicle << ','
                << sim::to_string(static_cast<sim::Approach>(e.approach)) << ',' << e.value
                << '\n';
    }

    RunResult r;
    r.seed = seed;
    r.mean_dwell = world.mean_dwell();
    r.n_vehicles = static_cast<long>(world.dwell_records().size());
    r.counters = world.counters();
    const double floor = world_cfg.topology.region_length / world_cfg.limits.v_max;
    for (const auto& d : world.dwell_records())
        r.max_dwell_error = std::max(r.max_dwell_error, floor - d.dwell());
    return r;
}

std::vector<SummaryRow> summarize(const std::vector<RunResult>& runs) {
    std::vector<SummaryRow> rows;
    std::size_t i = 0;
    while (i < runs.size()) {
        std::size_t j = i;
        SummaryRow row;
        row.sweep_key = runs[i].sweep_key;
        row.sweep_value = runs[i].sweep_value;
        std::vector<double> means;
        for (; j < runs.size() && runs[j].point == runs[i].point; ++j) {
            row.n_vehicles += runs[j].n_vehicles;
            row.safety_violations += runs[j].counters.safety_violations();
            row.feasibility_failures += runs[j].counters.feasibility_failures;
            if (!std::isnan(runs[j].mean_dwell)) means.push_back(runs[j].mean_dwell);
        }
        if (means.empty()) {
            row.mean_dwell = row.std_dwell = std::numeric_limits<double>::quiet_NaN();
        } else {
            double sum = 0.0;
            for (double m : means) sum += m;
            row.mean_dwell = sum / static_cast<double>(means.size());
            double ss = 0.0;
            for (double m : means) ss += (m - row.mean_dwell) * (m - row.mean_dwell);
            row.std_dwell =
                means.size() > 1 ? std::sqrt(ss / static_cast<double>(means.size() - 1)) : 0.0;
        }
        rows.push_back(row);
        i = j;
    }
    return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << std::setprecision(17) << kSummaryHeader << '\n';
    for (const auto& r : rows)
        out << r.sweep_key << ',' << r.sweep_value << ',' << r.mean_dwell << ',' << r.std_dwell
            << ',' << r.n_vehicles << ',' << r.safety_violations << '\n';
}

BatchResult run_batch(const ScenarioConfig& config, const BatchOptions& options) {
    config.validate();
    const auto points = expand_sweep(config);
    const auto& seeds = config.run.seeds;

    BatchResult result;
    if (options.out_dir) std::filesystem::create_directories(*options.out_dir);
    if (config.run.duration <= 0.0) {
        // Nothing to simulate: header-only outputs.
        if (options.out_dir) {
            std::ofstream s(*options.out_dir / "summary.csv");
            write_summary_csv(s, {});
        }
        return result;
    }

    result.runs.resize(points.size() * seeds.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            const std::size_t job = next.fetch_add(1);
            if (job >= result.runs.size()) return;
            const std::size_t p = job / seeds.size();
            const std::uint64_t seed = seeds[job % seeds.size()];
            std::optional<std::filesystem::path> trace_csv, events_csv;
            if (options.out_dir) {
                events_csv = *options.out_dir / ("events_" + run_stem(p, seed) + ".csv");
                if (config.run.trace_stride > 0)
                    trace_csv = *options.out_dir / ("trace_" + run_stem(p, seed) + ".csv");
            }
            try {
                RunResult r = run_single(points[p].world, seed, config.run.duration,
                                         config.run.trace_stride, trace_csv, events_csv);
                r.point = p;
                r.sweep_key = points[p].key;
                r.sweep_value = points[p].value;
                result.runs[job] = std::move(r);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };

    unsigned n_threads = options.threads ? options.threads : std::thread::hardware_concurrency();
    n_threads = std::max(1u, std::min<unsigned>(n_threads, result.runs.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    result.summary = summarize(result.runs);

    if (options.out_dir) {
        std::ofstream s(*options.out_dir / "summary.csv");
        write_summary_csv(s, result.summary);
        std::ofstream m(*options.out_dir / "runs.csv");
        m << std::setprecision(17) << "point,sweep_key,sweep_value,seed,events_file,mean_dwell_s\n";
        for (const auto& r : result.runs)
            m << r.point << ',' << r.sweep_key << ',' << r.sweep_value << ',' << r.seed << ','
              << "events_" << run_stem(r.point, r.seed) << ".csv," << r.mean_dwell << '\n';
    }
    return result;
}

}  // namespace mixtraffic::cli
