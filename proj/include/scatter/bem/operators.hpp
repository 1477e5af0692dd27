#pragma once

#include "scatter/bem/kernels.hpp"
#include "scatter/bem/waves.hpp"

namespace scatter::bem {

/// Face-level kernels. Combined is -i*eta*V + K (indirect equation),
/// CombinedAdjoint is -i*eta*V + K' (direct equation).
enum class KernelKind { SingleLayer, DoubleLayer, AdjointDoubleLayer, Combined, CombinedAdjoint };

enum class LayerOperator { V, K, Kprime };

struct KernelParams {
    KernelKind kind = KernelKind::Combined;
    double kappa = 1.0;
    double eta = 1.0;
};

struct BlockOptions {
    /// Tile edge W; one W x W tile of the face matrix is assembled at a time.
    int tile = 32;
    /// Largest number of right-hand sides D sharing one tile.
    int max_rhs = 16;
};

/// Entry (i, j) of the face-level matrix: kernel at barycenter pairs off the
/// diagonal, the singular correction for V on the diagonal, zero diagonal for K and K'.
cplx face_kernel(const BemGeometry& geo, const KernelParams& params, int i, int j);

/// Y = A X for the face-level matrix A without storing A: tiles are assembled on
/// the fly and reused for all D columns of X. Row tiles run in parallel, each
/// owning its output rows. Throws BlockTooWide if D exceeds options.max_rhs.
Eigen::MatrixXcd blocked_multiwave_product(const BemGeometry& geo, const KernelParams& params,
                                           const Eigen::MatrixXcd& rhs, const BlockOptions& options = {});

/// Reference product evaluating every kernel entry separately for each column.
Eigen::MatrixXcd naive_product(const BemGeometry& geo, const KernelParams& params, const Eigen::MatrixXcd& rhs);

/// Integrals of piecewise-linear vertex data over each face.
Eigen::MatrixXcd face_integrals(const BemGeometry& geo, const Eigen::MatrixXcd& vertex_values);

/// Transpose of face_integrals.
Eigen::MatrixXcd distribute_to_vertices(const BemGeometry& geo, const Eigen::MatrixXcd& face_values);

Eigen::MatrixXcd apply_mass(const BemGeometry& geo, const Eigen::MatrixXcd& vertex_values);

using Density = Eigen::MatrixXcd;

/// Galerkin weak-form image of V, K or K' applied to vertex densities, one column
/// per wave, each with its own wavenumber.
Density apply_layer_operators(const mesh::TriangleMesh& mesh, const WaveSet& waves, const Density& densities,
                              LayerOperator which, const BlockOptions& options = {});
Density apply_layer_operators(const BemGeometry& geo, const WaveSet& waves, const Density& densities,
                              LayerOperator which, const BlockOptions& options = {});

/// Galerkin matrix 1/2 M + Av^T A Av of the indirect (adjoint = false) or direct
/// (adjoint = true) boundary integral equation, applied to columns sharing one wavenumber.
Eigen::MatrixXcd apply_boundary_operator(const BemGeometry& geo, double kappa, double eta, bool adjoint,
                                         const Eigen::MatrixXcd& densities, const BlockOptions& options = {});

} // namespace scatter::bem
