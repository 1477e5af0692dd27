#pragma once

#include "scatter/mesh/bvh.hpp"
#include "scatter/mesh/triangle_mesh.hpp"

#include <vector>

namespace scatter::mesh {

/// Nearest-point queries against a fixed surface.
class SurfaceDistance {
public:
    explicit SurfaceDistance(const TriangleMesh& mesh);
    double operator()(const Vec3& p) const;

private:
    const TriangleMesh& mesh_;
    Bvh bvh_;
};

/// Sample points on each face: barycentric lattice with `subdivisions` steps per
/// edge plus the barycenter. The default of 2 adds edge midpoints and the
/// barycenter to the vertices.
std::vector<Vec3> surface_samples(const TriangleMesh& mesh, int subdivisions = 2);

struct HausdorffOptions {
    int subdivisions = 2;
};

double hausdorff_distance(const TriangleMesh& a, const TriangleMesh& b, const HausdorffOptions& options = {});

/// Hausdorff distance divided by the diameter of `a`.
double relative_hausdorff_distance(const TriangleMesh& a, const TriangleMesh& b, const HausdorffOptions& options = {});

/// Generalized winding number of the closed surface around p (1 inside, 0 outside).
double winding_number(const TriangleMesh& mesh, const Vec3& p);

/// Per-vertex distance of `query` to `reference`, negative inside `reference`.
Eigen::VectorXd signed_distance_field(const TriangleMesh& reference, const TriangleMesh& query);

double signed_distance(const TriangleMesh& reference, const Vec3& p);

} // namespace scatter::mesh
