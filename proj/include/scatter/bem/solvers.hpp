#pragma once

#include "scatter/bem/operators.hpp"
#include "scatter/krylov/gmres.hpp"

#include <vector>

namespace scatter::bem {

struct BemSolveOptions {
    double tol = 1e-6;
    int max_iterations = 500;
    BlockOptions block;
};

/// Vertex densities with one GMRES report per wave. A report with
/// converged == false marks a NoConvergence outcome; the density is then the best iterate.
struct DensitySolution {
    Density density;
    std::vector<krylov::SolveReport> reports;

    bool converged() const;
    int max_iterations() const;
};

/// Solves (1/2 M + Av^T A Av) x = rhs for weak-form right-hand sides, where A is
/// the combined face operator of the indirect equation, or of the direct
/// equation when adjoint = true. Columns of one wavenumber share one lockstep GMRES.
DensitySolution solve_weak(const BemGeometry& geo, const WaveSet& waves, const Density& weak_rhs, bool adjoint,
                           const BemSolveOptions& options);

/// Indirect combined-field equation with nodal Dirichlet data (one column per wave).
DensitySolution solve_indirect(const BemGeometry& geo, const WaveSet& waves, const Density& boundary_data,
                               const BemSolveOptions& options);

/// Normal derivative of the total field for each incident plane wave.
DensitySolution solve_direct(const BemGeometry& geo, const WaveSet& waves, const BemSolveOptions& options);

/// Incident plane waves evaluated at the vertices.
Density incident_field(const BemGeometry& geo, const WaveSet& waves);

/// Weak right-hand side of the direct equation, from face-midpoint values of
/// du_i/dnu - i eta u_i.
Density direct_rhs(const BemGeometry& geo, const WaveSet& waves);

/// Far field of the combined potential with density phi.
Eigen::MatrixXcd farfield_from_indirect(const BemGeometry& geo, const WaveSet& waves, const EvalGrid& grid,
                                        const Density& phi);

/// Far field of the scattered wave from the normal derivative of the total field.
Eigen::MatrixXcd farfield_from_direct(const BemGeometry& geo, const WaveSet& waves, const EvalGrid& grid,
                                      const Density& dudn);

/// Adjoint of farfield_from_indirect with respect to the weighted grid pairing
/// and the Euclidean pairing of vertex coefficients: E^H W y.
Density farfield_indirect_adjoint(const BemGeometry& geo, const WaveSet& waves, const EvalGrid& grid,
                                  const Eigen::MatrixXcd& y);

/// Solves the indirect equation with data -u_i and evaluates the far field.
FarField forward_far_field(const mesh::TriangleMesh& mesh, const WaveSet& waves, const EvalGrid& grid,
                           const BemSolveOptions& options, std::vector<krylov::SolveReport>* reports = nullptr);
FarField forward_far_field(const BemGeometry& geo, const WaveSet& waves, const EvalGrid& grid,
                           const BemSolveOptions& options, std::vector<krylov::SolveReport>* reports = nullptr);

} // namespace scatter::bem
