#include "scatter/cli/commands.hpp"
#include "scatter/error.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>

using namespace scatter;
using namespace scatter::cli;

int main(int argc, char** argv)
{
    spdlog::set_default_logger(spdlog::stderr_color_mt("scatter"));

    CLI::App app{"Acoustic obstacle scattering: far-field simulation and shape reconstruction"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, output, log_level;
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "JSON run configuration")->envname("SCATTER_CONFIG");
    app.add_option("--output", output, "Output directory (overrides the config)")->envname("SCATTER_OUTPUT");
    app.add_option("--threads", threads, "Worker threads (0 uses every core)")->envname("SCATTER_THREADS");
    app.add_option("--seed", seed, "Noise seed (overrides the config)")->envname("SCATTER_SEED");
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->envname("SCATTER_LOG_LEVEL");

    Invocation inv;
    std::string mesh_path, truth_path;
    const std::map<std::string, std::function<int(const Invocation&)>> handlers = {
        {"make-data", cmd_make_data},   {"forward", cmd_forward}, {"reconstruct", cmd_reconstruct},
        {"report", cmd_report},         {"energy", cmd_energy},   {"remesh", cmd_remesh},
        {"validate-config", cmd_validate_config},
    };
    app.add_subcommand("make-data", "Simulate noisy far-field data from the truth mesh");
    app.add_subcommand("forward", "Noise-free far field of a mesh")->add_option("--mesh", mesh_path, "Mesh file");
    app.add_subcommand("reconstruct", "Reconstruct the obstacle from far-field data");
    app.add_subcommand("report", "Summarise a reconstruction run")->add_option("--truth", truth_path, "Reference mesh");
    app.add_subcommand("energy", "Tangent-point energy of a mesh")->add_option("--mesh", mesh_path, "Mesh file");
    auto* remesh = app.add_subcommand("remesh", "Isotropic remeshing of a mesh");
    remesh->add_option("--mesh", mesh_path, "Mesh file");
    remesh->add_option("--target-edge", inv.target_edge, "Target edge length (default: mean edge length)");
    app.add_subcommand("validate-config", "Check a configuration and print it with defaults filled in");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigFailure;
    }
    const std::string verb = app.get_subcommands().front()->get_name();

    try {
        if (!config_path.empty()) {
            inv.config = load_config(config_path);
            inv.has_config = true;
        }
        if (!output.empty()) inv.config.output = std::filesystem::absolute(output).string();
        if (seed) inv.config.seed = *seed;
        if (threads) inv.config.threads = *threads;
        if (!log_level.empty()) inv.config.log_level = log_level;
        if (inv.has_config) inv.config.validate();
        if (!mesh_path.empty()) inv.mesh = mesh_path;
        if (!truth_path.empty()) inv.truth = truth_path;

        const auto level = spdlog::level::from_str(inv.config.log_level);
        if (level == spdlog::level::off && inv.config.log_level != "off")
            throw Error(ErrorKind::ConfigError, "log_level: unknown level " + inv.config.log_level);
        spdlog::set_level(level);
        if (inv.config.threads < 0) throw Error(ErrorKind::ConfigError, "threads: must be nonnegative");
#ifdef _OPENMP
        if (inv.config.threads > 0) omp_set_num_threads(inv.config.threads);
#endif
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kConfigFailure;
    }

    try {
        return handlers.at(verb)(inv);
    } catch (const std::exception& e) {
        spdlog::error("{} failed: {}", verb, e.what());
        return exit_code_for(e);
    }
}
