#pragma once

#include "scatter/inverse/irgnm.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace scatter::cli {

inline constexpr int kSchemaVersion = 1;

/// Icosphere scaled per axis and then shifted.
struct IcosphereSpec {
    int level = 3;
    double radius = 1.0;
    Vec3 scale = Vec3::Ones();
    Vec3 offset = Vec3::Zero();
};

/// A mesh file path or a generator description.
using MeshSpec = std::variant<std::string, IcosphereSpec>;

struct RunConfig {
    std::optional<MeshSpec> truth_mesh;
    std::optional<MeshSpec> initial_mesh;
    /// eta = 0 stands for eta = kappa.
    std::vector<bem::WaveGroup> waves;
    int grid_level = 2;
    double noise_percent = 1.0;
    std::uint64_t seed = 0;
    /// Far-field file read by reconstruct and written by make-data.
    std::string data = "data.sffd";
    std::string output = "run";
    int threads = 0;
    std::string log_level = "info";
    inverse::GNConfig reconstruction;

    /// Relative paths in the config resolve against this directory (not serialised).
    std::filesystem::path base_dir;

    std::filesystem::path resolve(const std::string& path) const;
    bem::WaveSet wave_set() const;
    bem::EvalGrid grid() const;
    /// Throws ConfigError on any out-of-range value.
    void validate() const;
};

/// Parses and validates a configuration. Unknown keys and a missing or wrong
/// schema_version are ConfigErrors; malformed JSON is a ParseError with
/// "source:line:column" context.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Fully populated JSON with every default made explicit.
std::string emit_config(const RunConfig& config);

mesh::TriangleMesh build_mesh(const MeshSpec& spec, const RunConfig& config);

} // namespace scatter::cli
