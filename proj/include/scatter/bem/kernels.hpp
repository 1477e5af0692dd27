#pragma once

#include "scatter/mesh/triangle_mesh.hpp"

#include <vector>

namespace scatter::bem {

/// Outgoing Helmholtz fundamental solution exp(i k r) / (4 pi r). Throws CoincidentPoints for x == y.
cplx fundamental_solution(const Vec3& x, const Vec3& y, double kappa);

/// Integral of 1/|m - y| over the triangle, m its barycenter, in closed form
/// by splitting at m into three subtriangles.
double singular_self_integral(const Vec3& a, const Vec3& b, const Vec3& c);

/// Per-face data shared by every boundary-element operation on one mesh.
struct BemGeometry {
    explicit BemGeometry(const mesh::TriangleMesh& mesh);

    int faces = 0;
    int vertices = 0;
    VertexField positions;
    std::vector<Tri> triangles;
    std::vector<double> mx, my, mz; // barycenters
    std::vector<double> nx, ny, nz; // unit normals
    std::vector<double> area;
    std::vector<double> self_integral;
    Eigen::SparseMatrix<double> mass;
    Eigen::VectorXd lumped_mass;

    Vec3 barycenter(int t) const { return {mx[t], my[t], mz[t]}; }
    Vec3 normal(int t) const { return {nx[t], ny[t], nz[t]}; }
};

} // namespace scatter::bem
