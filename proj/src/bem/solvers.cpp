#include "scatter/bem/solvers.hpp"

#include "scatter/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace scatter::bem {

namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * std::numbers::pi);
const cplx I(0.0, 1.0);

void check_waves(const BemGeometry& geo, const WaveSet& waves, const Density& d)
{
    if (d.rows() != geo.vertices || d.cols() != waves.wave_count())
        throw Error(ErrorKind::ShapeMismatch, "density block does not match vertices x waves");
}

} // namespace

bool DensitySolution::converged() const
{
    return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.converged; });
}

int DensitySolution::max_iterations() const
{
    int m = 0;
    for (const auto& r : reports) m = std::max(m, r.iterations);
    return m;
}

DensitySolution solve_weak(const BemGeometry& geo, const WaveSet& waves, const Density& rhs, bool adjoint,
                           const BemSolveOptions& options)
{
    check_waves(geo, waves, rhs);
    DensitySolution sol;
    sol.density = Density::Zero(rhs.rows(), rhs.cols());
    sol.reports.resize(rhs.cols());

    const Eigen::VectorXd jacobi = (0.5 * geo.lumped_mass).cwiseInverse();
    const krylov::BlockOperator<cplx> precond = [&](const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) {
        out = jacobi.asDiagonal() * in;
    };
    const krylov::GmresOptions gopt{options.tol, options.max_iterations};

    for (int g = 0; g < static_cast<int>(waves.groups.size()); ++g) {
        const auto& grp = waves.groups[g];
        const int off = waves.column_offset(g);
        const int cnt = static_cast<int>(grp.directions.size());
        const krylov::BlockOperator<cplx> op = [&](const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) {
            out = apply_boundary_operator(geo, grp.kappa, grp.eta, adjoint, in, options.block);
        };
        for (int c0 = 0; c0 < cnt; c0 += options.block.max_rhs) {
            const int c = std::min(options.block.max_rhs, cnt - c0);
            const Eigen::MatrixXcd b = rhs.middleCols(off + c0, c);
            auto res = krylov::gmres_block<cplx>(op, b, gopt, &precond);
            sol.density.middleCols(off + c0, c) = res.x;
            for (int k = 0; k < c; ++k) sol.reports[off + c0 + k] = std::move(res.reports[k]);
        }
    }
    return sol;
}

DensitySolution solve_indirect(const BemGeometry& geo, const WaveSet& waves, const Density& boundary_data,
                               const BemSolveOptions& options)
{
    check_waves(geo, waves, boundary_data);
    return solve_weak(geo, waves, apply_mass(geo, boundary_data), false, options);
}

Density incident_field(const BemGeometry& geo, const WaveSet& waves)
{
    Density u(geo.vertices, waves.wave_count());
    int col = 0;
    for (const auto& grp : waves.groups)
        for (const Vec3& d : grp.directions) {
            for (int v = 0; v < geo.vertices; ++v)
                u(v, col) = std::polar(1.0, grp.kappa * geo.positions.row(v).dot(d.transpose()));
            ++col;
        }
    return u;
}

Density direct_rhs(const BemGeometry& geo, const WaveSet& waves)
{
    Eigen::MatrixXcd f(geo.faces, waves.wave_count());
    int col = 0;
    for (const auto& grp : waves.groups)
        for (const Vec3& d : grp.directions) {
            for (int t = 0; t < geo.faces; ++t) {
                const cplx ui = std::polar(1.0, grp.kappa * geo.barycenter(t).dot(d));
                f(t, col) = I * grp.kappa * geo.normal(t).dot(d) * ui - I * grp.eta * ui;
            }
            ++col;
        }
    return distribute_to_vertices(geo, f);
}

DensitySolution solve_direct(const BemGeometry& geo, const WaveSet& waves, const BemSolveOptions& options)
{
    return solve_weak(geo, waves, direct_rhs(geo, waves), true, options);
}

Eigen::MatrixXcd farfield_from_indirect(const BemGeometry& geo, const WaveSet& waves, const EvalGrid& grid,
                                        const Density& phi)
{
    check_waves(geo, waves, phi);
    const Eigen::MatrixXcd fi = face_integrals(geo, phi);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(grid.size(), phi.cols());
    for (int g = 0; g < static_cast<int>(waves.groups.size()); ++g) {
        const auto& grp = waves.groups[g];
        const int off = waves.column_offset(g);
        const int cnt = static_cast<int>(grp.directions.size());
        for (int z = 0; z < grid.size(); ++z) {
            const Vec3 zp = grid.points.row(z).transpose();
            for (int t = 0; t < geo.faces; ++t) {
                const cplx k = kInv4Pi * (-I * grp.kappa * zp.dot(geo.normal(t)) - I * grp.eta) *
                               std::polar(1.0, -grp.kappa * zp.dot(geo.barycenter(t)));
                for (int c = 0; c < cnt; ++c) out(z, off + c) += k * fi(t, off + c);
            }
        }
    }
    return out;
}

Density farfield_indirect_adjoint(const BemGeometry& geo, const WaveSet& waves, const EvalGrid& grid,
                                  const Eigen::MatrixXcd& y)
{
    if (y.rows() != grid.size() || y.cols() != waves.wave_count())
        throw Error(ErrorKind::ShapeMismatch, "far-field block does not match grid x waves");
    Eigen::MatrixXcd faces = Eigen::MatrixXcd::Zero(geo.faces, y.cols());
    for (int g = 0; g < static_cast<int>(waves.groups.size()); ++g) {
        const auto& grp = waves.groups[g];
        const int off = waves.column_offset(g);
        const int cnt = static_cast<int>(grp.directions.size());
        for (int t = 0; t < geo.faces; ++t)
            for (int z = 0; z < grid.size(); ++z) {
                const Vec3 zp = grid.points.row(z).transpose();
                const cplx k = kInv4Pi * (-I * grp.kappa * zp.dot(geo.normal(t)) - I * grp.eta) *
                               std::polar(1.0, -grp.kappa * zp.dot(geo.barycenter(t)));
                const cplx kc = std::conj(k) * grid.weights[z];
                for (int c = 0; c < cnt; ++c) faces(t, off + c) += kc * y(z, off + c);
            }
    }
    return distribute_to_vertices(geo, faces);
}

Eigen::MatrixXcd farfield_from_direct(const BemGeometry& geo, const WaveSet& waves, const EvalGrid& grid,
                                      const Density& dudn)
{
    check_waves(geo, waves, dudn);
    const Eigen::MatrixXcd fi = face_integrals(geo, dudn);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(grid.size(), dudn.cols());
    for (int g = 0; g < static_cast<int>(waves.groups.size()); ++g) {
        const auto& grp = waves.groups[g];
        const int off = waves.column_offset(g);
        const int cnt = static_cast<int>(grp.directions.size());
        for (int z = 0; z < grid.size(); ++z) {
            const Vec3 zp = grid.points.row(z).transpose();
            for (int t = 0; t < geo.faces; ++t) {
                const cplx k = -kInv4Pi * std::polar(1.0, -grp.kappa * zp.dot(geo.barycenter(t)));
                for (int c = 0; c < cnt; ++c) out(z, off + c) += k * fi(t, off + c);
            }
        }
    }
    return out;
}

FarField forward_far_field(const BemGeometry& geo, const WaveSet& waves, const EvalGrid& grid,
                           const BemSolveOptions& options, std::vector<krylov::SolveReport>* reports)
{
    waves.validate();
    const DensitySolution phi = solve_indirect(geo, waves, -incident_field(geo, waves), options);
    if (reports) *reports = phi.reports;
    FarField out;
    out.values = farfield_from_indirect(geo, waves, grid, phi.density);
    out.grid = grid;
    out.waves = waves;
    return out;
}

FarField forward_far_field(const mesh::TriangleMesh& mesh, const WaveSet& waves, const EvalGrid& grid,
                           const BemSolveOptions& options, std::vector<krylov::SolveReport>* reports)
{
    return forward_far_field(BemGeometry(mesh), waves, grid, options, reports);
}

} // namespace scatter::bem
