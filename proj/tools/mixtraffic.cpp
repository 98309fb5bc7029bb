// Batch runner for the mixed-traffic intersection simulator.
//
//   mixtraffic run <config.json> [--out DIR] [--seeds N] [--dt X] [--threads N]
//
// Exit codes: 0 success, 2 config error, 3 safety violations, 4 feasibility failure.

#include <cstdint>
#include <iostream>
#include <numeric>

#include "CLI11.hpp"
#include "mixtraffic/cli/batch.hpp"
#include "mixtraffic/cli/config.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSafety = 3;
constexpr int kExitFeasibility = 4;

}  // namespace

int main(int argc, char** argv) {
    using namespace mixtraffic;

    CLI::App app{"Mixed-traffic signalized intersection simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int seeds = 0;
    double dt = 0.0;
    double duration = -1.0;
    unsigned threads = 0;
    bool print_config = false;

    auto* run = app.add_subcommand("run", "Run every sweep point and seed of a scenario");
    run->add_option("config", config_path, "Scenario JSON file")->required();
    run->add_option("--out", out_dir, "Directory for summary, event and trace CSVs");
    run->add_option("--seeds", seeds, "Use seeds 1..N instead of run.seeds")
        ->check(CLI::PositiveNumber);
    run->add_option("--dt", dt, "Override run.dt_s")->check(CLI::PositiveNumber);
    run->add_option("--duration", duration, "Override run.duration_s")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--threads", threads, "Worker threads (default: all cores)");
    run->add_flag("--print-config", print_config, "Echo the resolved config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    cli::ScenarioConfig config;
    try {
        config = cli::load_config(config_path);
        if (seeds > 0) {
            config.run.seeds.resize(static_cast<std::size_t>(seeds));
            std::iota(config.run.seeds.begin(), config.run.seeds.end(), std::uint64_t{1});
        }
        if (dt > 0.0) config.world.dt = dt;
        if (duration >= 0.0) config.run.duration = duration;
        config.validate();
    } catch (const ConfigError& e) {
        std::cerr << "config error in " << config_path << ": " << e.what() << '\n';
        return kExitConfig;
    }

    if (print_config) {
        std::cout << cli::serialize_config(config);
        return 0;
    }

    cli::BatchOptions options;
    if (!out_dir.empty()) options.out_dir = out_dir;
    options.threads = threads;

    cli::BatchResult result;
    try {
        result = cli::run_batch(config, options);
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << '\n';
        return 1;
    }

    cli::write_summary_csv(std::cout, result.summary);

    if (result.feasibility_failures() > 0) {
        std::cerr << result.feasibility_failures() << " CAV planning failure(s)\n";
        return kExitFeasibility;
    }
    if (result.safety_violations() > 0) {
        std::cerr << result.safety_violations() << " safety violation(s)\n";
        return kExitSafety;
    }
    return 0;
}
