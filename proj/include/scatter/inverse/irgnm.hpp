#pragma once

#include "scatter/inverse/gauss_newton.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace scatter::inverse {

struct RemeshPolicy {
    bool enabled = true;
    /// Remesh when longest / shortest edge exceeds this.
    double max_edge_ratio = 10.0;
    /// Remesh after every this many accepted steps (0 disables).
    int every = 8;
    /// Target edge length; 0 keeps the initial mean edge length.
    double target_edge = 0.0;
    int smoothing_rounds = 3;
};

struct GNConfig {
    double alpha0 = 1.0;
    double rho = 0.8;
    double tau = 2.0;
    double sigma = 1e-4;
    int max_iterations = 30;
    double tol_forward = 1e-6;
    double tol_derivative = 1e-2;
    double tol_update = 1e-2;
    int gmres_max_iterations = 200;
    /// Coupling parameter of the reconstruction's own solves; 0 uses kappa. The
    /// coupling stored with the data only describes how the data was generated.
    double eta = 0.0;
    RemeshPolicy remesh;
    tp::EnergyParams energy;
    bem::BlockOptions block;
    /// Wavenumbers used by each successive stage; empty runs one stage on all data.
    std::vector<std::vector<double>> stages;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
    ModelOptions model_options() const;
};

enum class StopReason { Discrepancy, IterationBudget, StepTooSmall, NoProgress, SolverFailure };

std::string to_string(StopReason reason);

/// One row per visited iterate; the step columns describe the update taken from it.
struct IterationRecord {
    int stage = 0;
    int k = 0;
    double alpha = 0.0;
    double residual = 0.0;
    double energy = 0.0;
    double objective = 0.0;
    int faces = 0;
    bool step_taken = false;
    double step = 0.0;
    double max_step = 0.0;
    double slope = 0.0;
    int gmres_iterations = 0;
    bool fallback = false;
    /// E(f_{k+1}) <= (J_k(f_k) - 1/2 |F(f_{k+1}) - g|^2) / alpha_{k+1}, before any remeshing.
    bool energy_bound = false;
    bool remeshed = false;
    double wall_seconds = 0.0;
};

struct GNState {
    mesh::TriangleMesh mesh;
    double alpha = 0.0;
    int k = 0;
    double delta = 0.0;
    std::vector<IterationRecord> history;
    StopReason stop = StopReason::IterationBudget;
    std::string message;
};

struct RunOutput {
    std::filesystem::path directory;
    /// Written verbatim to config.json when non-empty.
    std::string config_snapshot;
    bool write_meshes = true;
};

/// Iteratively regularised Gauss-Newton reconstruction from far-field data with
/// noise level data.delta, stopped by the discrepancy principle. Stages run in
/// order, each warm-started from the previous stage's final shape.
GNState irgnm_run(const mesh::TriangleMesh& initial, const bem::FarField& data, const GNConfig& config,
                  const RunOutput* output = nullptr);

/// Columns of `data` belonging to the listed wavenumbers, with the noise level
/// scaled by the share of the data norm.
bem::FarField select_wavenumbers(const bem::FarField& data, const std::vector<double>& kappas);

/// Far field of `truth` plus iid complex Gaussian noise scaled to
/// noise_percent of the weighted data norm; delta records the noise norm.
bem::FarField make_noisy_data(const mesh::TriangleMesh& truth, const bem::WaveSet& waves, const bem::EvalGrid& grid,
                              double noise_percent, std::uint64_t seed, const bem::BemSolveOptions& options = {});

void write_history_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& history);

} // namespace scatter::inverse
