#pragma once

#include "scatter/mesh/triangle_mesh.hpp"

namespace scatter::mesh {

struct CcdOptions {
    /// Separation kept between any two triangles, relative to the mean edge length.
    double margin_factor = 1e-3;
    /// Largest step examined; contacts beyond it are reported as unbounded.
    /// Non-positive selects a horizon at which every vertex has moved ten mesh diameters.
    double horizon = 0.0;
    int max_advancement_steps = 500;
};

/// Largest t such that positions + s * direction stays free of triangle-triangle
/// contact for all s in [0, t), by conservative advancement over BVH-pruned face
/// pairs. Returns +infinity when no contact occurs within the horizon.
/// Throws AlreadyIntersecting if the input mesh touches itself.
double ccd_max_step(const TriangleMesh& mesh, const VertexField& direction, const CcdOptions& options = {});

/// True if any two non-adjacent triangles intersect (adjacent pairs are checked
/// on their non-shared features).
bool self_intersects(const TriangleMesh& mesh);

} // namespace scatter::mesh
