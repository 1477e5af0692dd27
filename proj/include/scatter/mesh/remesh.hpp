#pragma once

#include "scatter/mesh/triangle_mesh.hpp"

namespace scatter::mesh {

struct RemeshReport {
    int splits = 0;
    int collapses = 0;
    int flips = 0;
    int skipped_collapses = 0;
    int skipped_flips = 0;
};

/// Isotropic remeshing toward `target_edge`: splits above 4/3 of the target,
/// collapses below 4/5, Delaunay edge flips, then `smoothing_rounds` rounds of
/// uniform Laplacian smoothing restricted to the tangent plane.
/// Collapses and flips that would break manifoldness are skipped and counted;
/// throws RemeshFailed only if the result is not a valid closed mesh.
TriangleMesh remesh(const TriangleMesh& mesh, double target_edge, int smoothing_rounds = 3,
                    RemeshReport* report = nullptr);

} // namespace scatter::mesh
