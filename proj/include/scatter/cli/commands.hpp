#pragma once

#include "scatter/cli/config.hpp"

#include <optional>
#include <string>

namespace scatter::cli {

enum ExitCode : int { kSuccess = 0, kComputeFailure = 1, kConfigFailure = 2 };

struct Invocation {
    RunConfig config;
    bool has_config = false;
    /// Mesh operated on by forward, energy and remesh; falls back to the config.
    std::optional<std::string> mesh;
    /// Reference surface for report; falls back to the config's truth mesh.
    std::optional<std::string> truth;
    /// Target edge length for remesh; 0 keeps the mean edge length.
    double target_edge = 0.0;
};

/// Each command validates its inputs first (ConfigError on failure) and then
/// computes. Files land in config.output unless noted.
///
/// make-data: far field of the truth mesh plus noise, written to config.data
/// with a JSON sidecar (config.data + ".json").
int cmd_make_data(const Invocation& inv);
/// forward: noise-free far field of a mesh as farfield.sffd and farfield.csv.
int cmd_forward(const Invocation& inv);
/// reconstruct: regularised Gauss-Newton run; exit 0 only on the discrepancy stop.
int cmd_reconstruct(const Invocation& inv);
/// report: metrics.json plus signed-distance and energy-density PLY files for
/// the run stored in config.output.
int cmd_report(const Invocation& inv);
/// energy: tangent-point energy of a mesh, written to energy.json.
int cmd_energy(const Invocation& inv);
/// remesh: isotropic remeshing of a mesh, written to remeshed.obj.
int cmd_remesh(const Invocation& inv);
/// validate-config: prints the normalised configuration.
int cmd_validate_config(const Invocation& inv);

/// Maps an error to the documented exit code.
int exit_code_for(const std::exception& e);

} // namespace scatter::cli
