#include "scatter/inverse/irgnm.hpp"

#include "scatter/error.hpp"
#include "scatter/mesh/mesh_io.hpp"
#include "scatter/mesh/remesh.hpp"
#include "scatter/mesh/ccd.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace scatter::inverse {

namespace {

using Clock = std::chrono::steady_clock;

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path);
    out << text;
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

std::string iterate_name(int stage, int k, int stages)
{
    char buf[64];
    if (stages > 1)
        std::snprintf(buf, sizeof buf, "stage%d_iter_%04d.obj", stage, k);
    else
        std::snprintf(buf, sizeof buf, "iter_%04d.obj", k);
    return buf;
}

bool needs_remesh(const mesh::TriangleMesh& m, const RemeshPolicy& policy, int accepted)
{
    if (!policy.enabled) return false;
    if (m.max_edge_length() > policy.max_edge_ratio * m.min_edge_length()) return true;
    return policy.every > 0 && accepted % policy.every == 0;
}

struct StageOutcome {
    StopReason stop;
    std::string message;
};

class StageRunner {
public:
    StageRunner(const GNConfig& config, const bem::FarField& data, int stage, int stage_count, double target_edge,
                const RunOutput* output, std::vector<IterationRecord>& history, std::ofstream* timing)
        : config_(config), data_(data), stage_(stage), stage_count_(stage_count), target_edge_(target_edge),
          output_(output), history_(history), timing_(timing)
    {
    }

    StageOutcome run(mesh::TriangleMesh& mesh, double& alpha, int& k_out)
    {
        const ModelOptions mopt = config_.model_options();
        const double delta = data_.delta.value_or(0.0);
        std::optional<Eigen::MatrixXcd> cached;
        int accepted = 0;
        for (int k = 0;; ++k) {
            const auto t0 = Clock::now();
            k_out = k;
            alpha = config_.alpha0 * std::pow(config_.rho, k);
            if (output_ && output_->write_meshes)
                mesh::save_obj(mesh, (output_->directory / iterate_name(stage_, k, stage_count_)).string());

            const ForwardModel model(mesh, data_.waves, data_.grid, mopt, std::move(cached));
            cached.reset();
            if (model.unconverged_solves() > 0) return {StopReason::SolverFailure, "forward solve did not converge"};
            const Eigen::MatrixXcd residual = model.far_field() - data_.values;
            const auto eg = tp::tp_energy_gradient(mesh, config_.energy);

            IterationRecord rec;
            rec.stage = stage_;
            rec.k = k;
            rec.alpha = alpha;
            rec.residual = bem::farfield_norm(data_.grid, residual);
            rec.energy = eg.value;
            rec.objective = 0.5 * rec.residual * rec.residual + alpha * eg.value;
            rec.faces = mesh.face_count();
            spdlog::info("stage {} iteration {}: residual {:.6e} (target {:.6e}), energy {:.6e}, alpha {:.3e}", stage_, k,
                         rec.residual, config_.tau * delta, rec.energy, alpha);

            const auto finish = [&](StopReason reason, std::string message) {
                rec.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
                push(rec);
                return StageOutcome{reason, std::move(message)};
            };
            if (rec.residual < config_.tau * delta)
                return finish(StopReason::Discrepancy, "residual below tau * delta");
            if (k >= config_.max_iterations) return finish(StopReason::IterationBudget, "iteration budget exhausted");

            const tp::MetricOperator metric(mesh, config_.energy);
            const tp::Preconditioner precond(mesh, config_.energy);
            const NormalSystem system(model, metric, precond, alpha);
            const VertexField grad = objective_gradient(model, residual, alpha, eg.gradient);
            if (grad.norm() == 0.0) return finish(StopReason::NoProgress, "objective gradient vanished");
            const Direction dir =
                gauss_newton_direction(system, grad, {config_.tol_update, config_.gmres_max_iterations});
            rec.gmres_iterations = dir.report.iterations;
            rec.slope = dir.slope;
            rec.fallback = dir.fallback;
            if (dir.fallback) spdlog::warn("Gauss-Newton direction not descending; using preconditioned gradient");
            if (!(dir.slope < 0.0)) return finish(StopReason::NoProgress, "no descent direction");

            std::optional<Eigen::MatrixXcd> trial_far;
            double trial_residual = 0.0, trial_energy = 0.0;
            const TrialObjective objective = [&](const mesh::TriangleMesh& trial,
                                                 double) -> std::optional<double> {
                std::vector<krylov::SolveReport> reports;
                auto ff = bem::forward_far_field(trial, data_.waves, data_.grid, mopt.forward, &reports);
                for (const auto& r : reports)
                    if (!r.converged) return std::nullopt;
                trial_residual = bem::farfield_norm(data_.grid, ff.values - data_.values);
                trial_energy = tp::tp_energy(trial, config_.energy);
                trial_far = std::move(ff.values);
                return 0.5 * trial_residual * trial_residual + alpha * trial_energy;
            };
            LineSearchResult ls;
            try {
                LineSearchOptions lopt;
                lopt.sigma = config_.sigma;
                ls = line_search(mesh, dir.v, rec.objective, dir.slope, objective, lopt);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::StepTooSmall) throw;
                return finish(StopReason::StepTooSmall, e.what());
            }
            rec.step_taken = true;
            rec.step = ls.step;
            rec.max_step = ls.max_step;
            const double next_alpha = config_.alpha0 * std::pow(config_.rho, k + 1);
            rec.energy_bound =
                trial_energy <= (rec.objective - 0.5 * trial_residual * trial_residual) / next_alpha;

            mesh = mesh.with_positions(mesh.positions() + ls.step * dir.v);
            ++accepted;
            cached = std::move(trial_far);
            if (needs_remesh(mesh, config_.remesh, accepted)) {
                try {
                    auto fresh = mesh::remesh(mesh, target_edge_, config_.remesh.smoothing_rounds);
                    if (mesh::self_intersects(fresh)) {
                        spdlog::warn("remeshed surface intersects itself; keeping the previous mesh");
                    } else {
                        mesh = std::move(fresh);
                        cached.reset();
                        rec.remeshed = true;
                    }
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::RemeshFailed) throw;
                    spdlog::warn("remeshing failed: {}", e.what());
                }
            }
            rec.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
            push(rec);
        }
    }

private:
    void push(const IterationRecord& rec)
    {
        history_.push_back(rec);
        if (timing_) {
            *timing_ << rec.stage << ',' << rec.k << ',' << rec.wall_seconds << '\n';
            timing_->flush();
        }
        if (output_) write_history_csv(output_->directory / "history.csv", history_);
    }

    const GNConfig& config_;
    const bem::FarField& data_;
    int stage_;
    int stage_count_;
    double target_edge_;
    const RunOutput* output_;
    std::vector<IterationRecord>& history_;
    std::ofstream* timing_;
};

} // namespace

std::string to_string(StopReason reason)
{
    switch (reason) {
    case StopReason::Discrepancy: return "discrepancy";
    case StopReason::IterationBudget: return "iteration budget";
    case StopReason::StepTooSmall: return "step too small";
    case StopReason::NoProgress: return "no progress";
    case StopReason::SolverFailure: return "solver failure";
    }
    return "unknown";
}

void GNConfig::validate() const
{
    const auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigError, what); };
    if (!(alpha0 > 0.0)) fail("alpha0 must be positive");
    if (!(rho > 0.0 && rho < 1.0)) fail("rho must lie in (0, 1)");
    if (!(tau > 1.0)) fail("tau must exceed 1");
    if (!(sigma >= 0.0 && sigma < 1.0)) fail("sigma must lie in [0, 1)");
    if (max_iterations < 0) fail("max_iterations must be nonnegative");
    if (!(tol_forward > 0.0 && tol_derivative > 0.0 && tol_update > 0.0)) fail("tolerances must be positive");
    if (tol_derivative < tol_forward) fail("derivative tolerance must not be below the forward tolerance");
    if (gmres_max_iterations < 1) fail("gmres_max_iterations must be positive");
    if (eta < 0.0) fail("eta must be nonnegative");
    if (remesh.max_edge_ratio <= 1.0) fail("remesh max_edge_ratio must exceed 1");
    if (remesh.every < 0 || remesh.target_edge < 0.0 || remesh.smoothing_rounds < 0) fail("invalid remesh policy");
    if (block.tile < 1 || block.max_rhs < 1) fail("block sizes must be positive");
    energy.validate();
    for (const auto& s : stages)
        if (s.empty()) fail("a stage lists no wavenumbers");
}

ModelOptions GNConfig::model_options() const
{
    ModelOptions m;
    m.forward = {tol_forward, 500, block};
    m.derivative = {tol_derivative, 500, block};
    return m;
}

bem::FarField select_wavenumbers(const bem::FarField& data, const std::vector<double>& kappas)
{
    bem::FarField out;
    out.grid = data.grid;
    std::vector<int> cols;
    for (int g = 0; g < static_cast<int>(data.waves.groups.size()); ++g) {
        const auto& grp = data.waves.groups[g];
        bool wanted = false;
        for (double k : kappas) wanted |= std::abs(k - grp.kappa) <= 1e-12 * std::max(1.0, std::abs(k));
        if (!wanted) continue;
        out.waves.groups.push_back(grp);
        for (std::size_t c = 0; c < grp.directions.size(); ++c) cols.push_back(data.waves.column_offset(g) + c);
    }
    if (out.waves.groups.size() != kappas.size())
        throw Error(ErrorKind::ConfigError, "stage wavenumber missing from the data");
    out.values.resize(data.values.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) out.values.col(c) = data.values.col(cols[c]);
    if (data.delta) {
        const double total = bem::farfield_norm(data.grid, data.values);
        out.delta = total > 0.0 ? *data.delta * bem::farfield_norm(out.grid, out.values) / total : 0.0;
    }
    return out;
}

GNState irgnm_run(const mesh::TriangleMesh& initial, const bem::FarField& data, const GNConfig& config,
                  const RunOutput* output)
{
    config.validate();
    data.grid.validate();
    data.waves.validate();
    if (mesh::self_intersects(initial)) throw Error(ErrorKind::AlreadyIntersecting, "initial mesh intersects itself");

    std::ofstream timing;
    if (output) {
        std::filesystem::create_directories(output->directory);
        if (!output->config_snapshot.empty()) write_text(output->directory / "config.json", output->config_snapshot);
        timing.open(output->directory / "timing.csv");
        timing << "stage,k,wall_seconds\n";
    }

    const double target = config.remesh.target_edge > 0.0 ? config.remesh.target_edge : initial.mean_edge_length();
    std::vector<std::vector<double>> stages = config.stages;
    if (stages.empty()) {
        stages.emplace_back();
        for (const auto& g : data.waves.groups) stages.back().push_back(g.kappa);
    }

    GNState state{initial, config.alpha0, 0, data.delta.value_or(0.0), {}, StopReason::IterationBudget, {}};
    const int count = static_cast<int>(stages.size());
    for (int s = 0; s < count; ++s) {
        bem::FarField stage_data = count == 1 && config.stages.empty() ? data : select_wavenumbers(data, stages[s]);
        for (auto& g : stage_data.waves.groups) g.eta = config.eta > 0.0 ? config.eta : g.kappa;
        StageRunner runner(config, stage_data, s, count, target, output, state.history, output ? &timing : nullptr);
        StageOutcome outcome;
        try {
            outcome = runner.run(state.mesh, state.alpha, state.k);
        } catch (const Error& e) {
            outcome = {StopReason::SolverFailure, std::string(to_string(e.kind())) + ": " + e.what()};
        }
        state.stop = outcome.stop;
        state.message = outcome.message;
        state.delta = stage_data.delta.value_or(0.0);
        spdlog::info("stage {} stopped: {} ({})", s, to_string(outcome.stop), outcome.message);
    }
    if (output) {
        write_text(output->directory / "stop_reason.txt", to_string(state.stop) + "\n" + state.message + "\n");
        mesh::save_obj(state.mesh, (output->directory / "final.obj").string());
    }
    return state;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& history)
{
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    std::fprintf(f, "stage,k,alpha,residual,energy,objective,faces,step,max_step,slope,gmres_iterations,fallback,"
                    "energy_bound,remeshed\n");
    for (const auto& r : history) {
        std::fprintf(f, "%d,%d,%.17g,%.17g,%.17g,%.17g,%d,", r.stage, r.k, r.alpha, r.residual, r.energy, r.objective,
                     r.faces);
        if (r.step_taken)
            std::fprintf(f, "%.17g,%.17g,%.17g,%d,%d,%d,%d\n", r.step, r.max_step, r.slope, r.gmres_iterations,
                         r.fallback ? 1 : 0, r.energy_bound ? 1 : 0, r.remeshed ? 1 : 0);
        else
            std::fprintf(f, ",,,%d,%d,,\n", r.gmres_iterations, r.fallback ? 1 : 0);
    }
    std::fclose(f);
}

bem::FarField make_noisy_data(const mesh::TriangleMesh& truth, const bem::WaveSet& waves, const bem::EvalGrid& grid,
                              double noise_percent, std::uint64_t seed, const bem::BemSolveOptions& options)
{
    if (!(noise_percent >= 0.0)) throw Error(ErrorKind::ConfigError, "noise percent must be nonnegative");
    bem::FarField out = bem::forward_far_field(truth, waves, grid, options);
    out.delta = 0.0;
    if (noise_percent == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXcd noise(out.values.rows(), out.values.cols());
    for (Eigen::Index j = 0; j < noise.cols(); ++j)
        for (Eigen::Index i = 0; i < noise.rows(); ++i) {
            const double re = normal(rng);
            noise(i, j) = cplx(re, normal(rng));
        }
    noise *= noise_percent / 100.0 * bem::farfield_norm(grid, out.values) / bem::farfield_norm(grid, noise);
    out.values += noise;
    out.delta = bem::farfield_norm(grid, noise);
    return out;
}

} // namespace scatter::inverse
