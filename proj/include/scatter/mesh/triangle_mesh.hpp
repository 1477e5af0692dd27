#pragma once

#include "scatter/types.hpp"

#include <Eigen/SparseCore>

#include <memory>
#include <vector>

namespace scatter::mesh {

struct Edge {
    int v0;
    int v1;
    int f0; // face containing the directed edge v0 -> v1
    int f1; // face containing v1 -> v0
};

/// Connectivity shared by all meshes with the same triangle list.
struct Topology {
    std::vector<Tri> triangles;
    std::vector<Edge> edges;
    std::vector<std::vector<int>> vertex_faces;
    int vertex_count = 0;
};

struct FaceGeometry {
    FaceScalarField areas;
    FaceVectorField barycenters;
    FaceVectorField normals;
};

/// Closed, consistently oriented triangle surface. Construction validates the
/// topology and flips all faces if the signed volume is negative so that the
/// normals point outward. Immutable afterwards.
class TriangleMesh {
public:
    TriangleMesh(VertexField positions, std::vector<Tri> triangles);

    /// Same connectivity, new vertex positions. Only face degeneracy is rechecked.
    TriangleMesh with_positions(VertexField positions) const;

    int vertex_count() const { return static_cast<int>(positions_.rows()); }
    int face_count() const { return static_cast<int>(topology_->triangles.size()); }

    const VertexField& positions() const { return positions_; }
    Vec3 vertex(int i) const { return positions_.row(i).transpose(); }
    const std::vector<Tri>& triangles() const { return topology_->triangles; }
    const std::vector<Edge>& edges() const { return topology_->edges; }
    const Topology& topology() const { return *topology_; }

    const FaceScalarField& areas() const { return geometry_.areas; }
    const FaceVectorField& barycenters() const { return geometry_.barycenters; }
    const FaceVectorField& normals() const { return geometry_.normals; }
    const FaceGeometry& geometry() const { return geometry_; }

    double total_area() const { return geometry_.areas.sum(); }
    double signed_volume() const;
    double mean_edge_length() const;
    double min_edge_length() const;
    double max_edge_length() const;
    /// Largest distance between two vertices.
    double diameter() const;

private:
    TriangleMesh(VertexField positions, std::shared_ptr<const Topology> topology);

    VertexField positions_;
    std::shared_ptr<const Topology> topology_;
    FaceGeometry geometry_;
};

/// Checks closedness and orientation and builds the edge table.
/// Throws NotClosed / NotOriented.
std::shared_ptr<Topology> build_topology(std::vector<Tri> triangles, int vertex_count);

FaceGeometry face_geometry(const VertexField& positions, const std::vector<Tri>& triangles);
inline FaceGeometry face_geometry(const TriangleMesh& mesh) { return mesh.geometry(); }

TriangleMesh icosphere(int level, double radius = 1.0);

TriangleMesh scaled(const TriangleMesh& mesh, const Vec3& factors);
TriangleMesh translated(const TriangleMesh& mesh, const Vec3& offset);

/// Disjoint union of two surfaces.
TriangleMesh merged(const TriangleMesh& a, const TriangleMesh& b);

/// Cotangent stiffness matrix. With clamp = true negative edge weights are set
/// to zero, which makes the matrix positive semidefinite.
Eigen::SparseMatrix<double> cotan_laplacian(const TriangleMesh& mesh, bool clamp = false);

/// Consistent piecewise-linear mass matrix.
Eigen::SparseMatrix<double> mass_matrix(const TriangleMesh& mesh);

/// Sparse |T| x |V| operator integrating a piecewise-linear function over each face.
Eigen::SparseMatrix<double> averaging_operator(const TriangleMesh& mesh);

} // namespace scatter::mesh
