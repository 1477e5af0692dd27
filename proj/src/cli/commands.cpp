#include "scatter/cli/commands.hpp"

#include "scatter/bem/farfield_io.hpp"
#include "scatter/bem/solvers.hpp"
#include "scatter/error.hpp"
#include "scatter/mesh/distance.hpp"
#include "scatter/mesh/mesh_io.hpp"
#include "scatter/mesh/remesh.hpp"
#include "scatter/tp/energy.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace scatter::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void input_error(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

/// Runs an input-loading step, reporting any failure as a configuration error.
template <class F>
auto load_input(const std::string& what, F&& f)
{
    try {
        return f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigError) throw;
        input_error(what + ": " + e.what());
    }
}

void require_config(const Invocation& inv, const char* verb)
{
    if (!inv.has_config) input_error(std::string(verb) + " needs --config");
}

fs::path output_dir(const Invocation& inv)
{
    const fs::path dir = inv.config.resolve(inv.config.output);
    fs::create_directories(dir);
    return dir;
}

void write_json(const fs::path& path, const Json& j)
{
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

Json read_json(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) input_error("cannot read " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception&) {
        input_error(path.string() + ": malformed JSON");
    }
}

/// The --mesh argument (relative to the working directory), else the initial
/// mesh, else the truth mesh of the config.
mesh::TriangleMesh subject_mesh(const Invocation& inv)
{
    return load_input("mesh", [&] {
        if (inv.mesh) return mesh::load_mesh(*inv.mesh);
        if (inv.has_config && inv.config.initial_mesh) return build_mesh(*inv.config.initial_mesh, inv.config);
        if (inv.has_config && inv.config.truth_mesh) return build_mesh(*inv.config.truth_mesh, inv.config);
        input_error("no mesh given (use --mesh or a config with initial_mesh or truth_mesh)");
    });
}

bem::BemSolveOptions forward_options(const RunConfig& c)
{
    return {c.reconstruction.tol_forward, 500, c.reconstruction.block};
}

Json waves_json(const bem::WaveSet& waves)
{
    Json arr = Json::array();
    for (const auto& g : waves.groups)
        arr.push_back({{"kappa", g.kappa}, {"eta", g.eta}, {"directions", g.directions.size()}});
    return arr;
}

double sum_timing(const fs::path& path)
{
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    double total = 0.0;
    while (std::getline(in, line)) {
        const auto comma = line.rfind(',');
        if (comma != std::string::npos) total += std::stod(line.substr(comma + 1));
    }
    return total;
}

} // namespace

int exit_code_for(const std::exception& e)
{
    if (const auto* err = dynamic_cast<const Error*>(&e))
        if (err->kind() == ErrorKind::ConfigError || err->kind() == ErrorKind::ParseError) return kConfigFailure;
    return kComputeFailure;
}

int cmd_make_data(const Invocation& inv)
{
    require_config(inv, "make-data");
    const RunConfig& c = inv.config;
    if (!c.truth_mesh) input_error("make-data needs truth_mesh");
    const auto truth = load_input("truth_mesh", [&] { return build_mesh(*c.truth_mesh, c); });
    const auto waves = c.wave_set();
    const auto grid = c.grid();

    const auto data = inverse::make_noisy_data(truth, waves, grid, c.noise_percent, c.seed, forward_options(c));
    const fs::path path = c.resolve(c.data);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    bem::save_farfield(path.string(), data);

    const double norm = c.noise_percent > 0.0 ? *data.delta * 100.0 / c.noise_percent
                                              : bem::farfield_norm(grid, data.values);
    Json side;
    side["file"] = path.filename().string();
    side["delta"] = *data.delta;
    side["seed"] = c.seed;
    side["noise_percent"] = c.noise_percent;
    side["farfield_norm"] = norm;
    side["grid_level"] = c.grid_level;
    side["grid_points"] = grid.size();
    side["waves"] = waves_json(waves);
    side["truth_faces"] = truth.face_count();
    write_json(path.string() + ".json", side);
    spdlog::info("wrote {} (delta {:.6e}, |F| {:.6e})", path.string(), *data.delta, norm);
    return kSuccess;
}

int cmd_forward(const Invocation& inv)
{
    require_config(inv, "forward");
    const RunConfig& c = inv.config;
    const auto m = subject_mesh(inv);
    const auto dir = output_dir(inv);
    std::vector<krylov::SolveReport> reports;
    const auto ff = bem::forward_far_field(m, c.wave_set(), c.grid(), forward_options(c), &reports);
    bem::save_farfield((dir / "farfield.sffd").string(), ff);
    bem::export_farfield_csv((dir / "farfield.csv").string(), ff);
    int iterations = 0;
    bool converged = true;
    for (const auto& r : reports) {
        iterations = std::max(iterations, r.iterations);
        converged = converged && r.converged;
    }
    spdlog::info("far field written to {} (max GMRES iterations {})", dir.string(), iterations);
    if (!converged) {
        spdlog::error("forward solve did not converge");
        return kComputeFailure;
    }
    return kSuccess;
}

int cmd_reconstruct(const Invocation& inv)
{
    require_config(inv, "reconstruct");
    const RunConfig& c = inv.config;
    if (!c.initial_mesh) input_error("reconstruct needs initial_mesh");
    const fs::path data_path = c.resolve(c.data);
    if (!fs::exists(data_path)) input_error("data: file not found: " + data_path.string());
    const auto data = load_input("data", [&] { return bem::load_farfield(data_path.string()); });
    if (!data.delta || !std::isfinite(*data.delta)) input_error("data: file carries no noise level");
    const auto initial = load_input("initial_mesh", [&] { return build_mesh(*c.initial_mesh, c); });

    const auto dir = output_dir(inv);
    const inverse::RunOutput out{dir, emit_config(c), true};
    const auto state = inverse::irgnm_run(initial, data, c.reconstruction, &out);

    Json summary;
    summary["stop_reason"] = inverse::to_string(state.stop);
    summary["message"] = state.message;
    summary["iterations"] = state.k;
    summary["delta"] = state.delta;
    summary["tau"] = c.reconstruction.tau;
    summary["final_residual"] = state.history.empty() ? 0.0 : state.history.back().residual;
    summary["faces"] = state.mesh.face_count();
    write_json(dir / "summary.json", summary);
    if (state.stop != inverse::StopReason::Discrepancy) {
        spdlog::error("reconstruction stopped without meeting the discrepancy target: {} ({})",
                      inverse::to_string(state.stop), state.message);
        return kComputeFailure;
    }
    spdlog::info("reconstruction reached the discrepancy target after {} iterations", state.k);
    return kSuccess;
}

int cmd_report(const Invocation& inv)
{
    const RunConfig& c = inv.config;
    const fs::path dir = c.resolve(c.output);
    for (const char* f : {"summary.json", "final.obj"})
        if (!fs::exists(dir / f)) input_error("report: " + (dir / f).string() + " not found (run reconstruct first)");
    const Json summary = read_json(dir / "summary.json");
    const auto final_mesh = load_input("final mesh", [&] { return mesh::load_mesh(dir / "final.obj"); });
    std::optional<mesh::TriangleMesh> truth;
    if (inv.truth)
        truth = load_input("truth", [&] { return mesh::load_mesh(*inv.truth); });
    else if (inv.has_config && c.truth_mesh)
        truth = load_input("truth_mesh", [&] { return build_mesh(*c.truth_mesh, c); });

    Json metrics;
    metrics["stop_reason"] = summary.at("stop_reason");
    metrics["iterations"] = summary.at("iterations");
    metrics["wall_seconds"] = fs::exists(dir / "timing.csv") ? sum_timing(dir / "timing.csv") : 0.0;
    const double residual = summary.at("final_residual").get<double>();
    const double delta = summary.at("delta").get<double>();
    metrics["final_residual"] = residual;
    metrics["delta"] = delta;
    metrics["residual_over_delta"] = delta > 0.0 ? Json(residual / delta) : Json(nullptr);
    metrics["faces"] = final_mesh.face_count();

    mesh::PlyAttributes density;
    density.face["tp_density"] = tp::tp_density(final_mesh, c.reconstruction.energy);
    mesh::save_ply(final_mesh, dir / "final_density.ply", density);
    if (truth) {
        metrics["relative_hausdorff"] = mesh::relative_hausdorff_distance(*truth, final_mesh);
        mesh::PlyAttributes sdf;
        sdf.vertex["signed_distance"] = mesh::signed_distance_field(*truth, final_mesh);
        mesh::save_ply(final_mesh, dir / "final_sdf.ply", sdf);
    } else {
        spdlog::info("no truth mesh given; Hausdorff distance omitted");
    }
    write_json(dir / "metrics.json", metrics);
    std::cout << metrics.dump(2) << '\n';
    return kSuccess;
}

int cmd_energy(const Invocation& inv)
{
    const auto m = subject_mesh(inv);
    const auto& params = inv.config.reconstruction.energy;
    Json j;
    j["energy"] = tp::tp_energy(m, params);
    j["p"] = params.p;
    j["faces"] = m.face_count();
    j["vertices"] = m.vertex_count();
    write_json(output_dir(inv) / "energy.json", j);
    std::cout << j.dump(2) << '\n';
    return kSuccess;
}

int cmd_remesh(const Invocation& inv)
{
    const auto m = subject_mesh(inv);
    const double target = inv.target_edge > 0.0 ? inv.target_edge : m.mean_edge_length();
    mesh::RemeshReport report;
    const auto out = mesh::remesh(m, target, inv.config.reconstruction.remesh.smoothing_rounds, &report);
    const auto dir = output_dir(inv);
    mesh::save_obj(out, dir / "remeshed.obj");
    Json j;
    j["target_edge"] = target;
    j["faces_before"] = m.face_count();
    j["faces_after"] = out.face_count();
    j["splits"] = report.splits;
    j["collapses"] = report.collapses;
    j["flips"] = report.flips;
    write_json(dir / "remesh.json", j);
    std::cout << j.dump(2) << '\n';
    return kSuccess;
}

int cmd_validate_config(const Invocation& inv)
{
    require_config(inv, "validate-config");
    std::cout << emit_config(inv.config);
    return kSuccess;
}

} // namespace scatter::cli
