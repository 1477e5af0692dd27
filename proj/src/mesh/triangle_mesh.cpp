#include "scatter/mesh/triangle_mesh.hpp"

#include "scatter/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>

namespace scatter::mesh {

namespace {

std::uint64_t edge_key(int a, int b)
{
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

void check_degenerate(const FaceScalarField& areas)
{
    if (areas.size() == 0) return;
    const double mean = areas.mean();
    for (Eigen::Index t = 0; t < areas.size(); ++t) {
        if (!(areas[t] > 1e-14 * mean))
            throw Error(ErrorKind::DegenerateFace, "face " + std::to_string(t) + " has area " +
                                                       std::to_string(areas[t]));
    }
}

double enclosed_volume(const VertexField& x, const std::vector<Tri>& triangles)
{
    double vol = 0.0;
    for (const Tri& tri : triangles) {
        const Vec3 a = x.row(tri[0]).transpose();
        const Vec3 b = x.row(tri[1]).transpose();
        const Vec3 c = x.row(tri[2]).transpose();
        vol += a.dot(b.cross(c));
    }
    return vol / 6.0;
}

} // namespace

std::shared_ptr<Topology> build_topology(std::vector<Tri> triangles, int vertex_count)
{
    auto topo = std::make_shared<Topology>();
    topo->vertex_count = vertex_count;
    topo->vertex_faces.assign(vertex_count, {});

    std::unordered_map<std::uint64_t, int> directed;
    directed.reserve(triangles.size() * 3);
    for (int t = 0; t < static_cast<int>(triangles.size()); ++t) {
        const Tri& tri = triangles[t];
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k];
            const int b = tri[(k + 1) % 3];
            if (a < 0 || a >= vertex_count)
                throw Error(ErrorKind::ParseError, "face " + std::to_string(t) + " references vertex " +
                                                       std::to_string(a));
            if (a == b)
                throw Error(ErrorKind::DegenerateFace, "face " + std::to_string(t) + " repeats a vertex");
            if (!directed.emplace(edge_key(a, b), t).second)
                throw Error(ErrorKind::NotOriented, "directed edge " + std::to_string(a) + "->" +
                                                        std::to_string(b) + " appears twice");
            topo->vertex_faces[a].push_back(t);
        }
    }
    for (int v = 0; v < vertex_count; ++v) {
        if (topo->vertex_faces[v].empty())
            throw Error(ErrorKind::ParseError, "vertex " + std::to_string(v) + " is not referenced by any face");
    }

    topo->edges.reserve(triangles.size() * 3 / 2);
    for (int t = 0; t < static_cast<int>(triangles.size()); ++t) {
        const Tri& tri = triangles[t];
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k];
            const int b = tri[(k + 1) % 3];
            auto it = directed.find(edge_key(b, a));
            if (it == directed.end())
                throw Error(ErrorKind::NotClosed, "edge " + std::to_string(a) + "-" + std::to_string(b) +
                                                      " has only one adjacent face");
            if (a < b) topo->edges.push_back({a, b, t, it->second});
        }
    }
    topo->triangles = std::move(triangles);
    return topo;
}

FaceGeometry face_geometry(const VertexField& positions, const std::vector<Tri>& triangles)
{
    const auto n = static_cast<Eigen::Index>(triangles.size());
    FaceGeometry g;
    g.areas.resize(n);
    g.barycenters.resize(n, 3);
    g.normals.resize(n, 3);
    for (Eigen::Index t = 0; t < n; ++t) {
        const Tri& tri = triangles[t];
        const Vec3 a = positions.row(tri[0]).transpose();
        const Vec3 b = positions.row(tri[1]).transpose();
        const Vec3 c = positions.row(tri[2]).transpose();
        const Vec3 cr = (b - a).cross(c - a);
        const double norm = cr.norm();
        g.areas[t] = 0.5 * norm;
        g.barycenters.row(t) = ((a + b + c) / 3.0).transpose();
        if (norm > 0.0)
            g.normals.row(t) = (cr / norm).transpose();
        else
            g.normals.row(t).setZero();
    }
    return g;
}

TriangleMesh::TriangleMesh(VertexField positions, std::vector<Tri> triangles)
{
    if (!positions.allFinite()) throw Error(ErrorKind::ParseError, "non-finite vertex coordinate");
    const int nv = static_cast<int>(positions.rows());
    auto topo = build_topology(std::move(triangles), nv);
    positions_ = std::move(positions);
    geometry_ = face_geometry(positions_, topo->triangles);
    check_degenerate(geometry_.areas);
    if (enclosed_volume(positions_, topo->triangles) < 0.0) {
        for (Tri& tri : topo->triangles) std::swap(tri[1], tri[2]);
        topo = build_topology(std::move(topo->triangles), nv);
        geometry_ = face_geometry(positions_, topo->triangles);
    }
    topology_ = std::move(topo);
}

TriangleMesh::TriangleMesh(VertexField positions, std::shared_ptr<const Topology> topology)
    : positions_(std::move(positions)), topology_(std::move(topology))
{
    if (positions_.rows() != topology_->vertex_count)
        throw Error(ErrorKind::ShapeMismatch, "position count does not match the topology");
    if (!positions_.allFinite()) throw Error(ErrorKind::DegenerateFace, "non-finite vertex coordinate");
    geometry_ = face_geometry(positions_, topology_->triangles);
    check_degenerate(geometry_.areas);
}

TriangleMesh TriangleMesh::with_positions(VertexField positions) const
{
    return TriangleMesh(std::move(positions), topology_);
}

double TriangleMesh::signed_volume() const
{
    return enclosed_volume(positions_, triangles());
}

double TriangleMesh::mean_edge_length() const
{
    double sum = 0.0;
    for (const Edge& e : edges()) sum += (vertex(e.v0) - vertex(e.v1)).norm();
    return sum / static_cast<double>(edges().size());
}

double TriangleMesh::min_edge_length() const
{
    double m = std::numeric_limits<double>::infinity();
    for (const Edge& e : edges()) m = std::min(m, (vertex(e.v0) - vertex(e.v1)).norm());
    return m;
}

double TriangleMesh::max_edge_length() const
{
    double m = 0.0;
    for (const Edge& e : edges()) m = std::max(m, (vertex(e.v0) - vertex(e.v1)).norm());
    return m;
}

double TriangleMesh::diameter() const
{
    double d2 = 0.0;
    const int n = vertex_count();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) d2 = std::max(d2, (positions_.row(i) - positions_.row(j)).squaredNorm());
    return std::sqrt(d2);
}

TriangleMesh icosphere(int level, double radius)
{
    if (level < 0 || level > 7)
        throw Error(ErrorKind::LevelTooLarge, "icosphere level " + std::to_string(level) + " outside [0, 7]");

    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (Vec3& v : verts) v.normalize();
    std::vector<Tri> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };

    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            verts.push_back((verts[a] + verts[b]).normalized());
            const int idx = static_cast<int>(verts.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<Tri> next;
        next.reserve(faces.size() * 4);
        for (const Tri& f : faces) {
            const int ab = mid(f[0], f[1]);
            const int bc = mid(f[1], f[2]);
            const int ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    VertexField pos(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) pos.row(static_cast<Eigen::Index>(i)) = radius * verts[i].transpose();
    return TriangleMesh(std::move(pos), std::move(faces));
}

TriangleMesh scaled(const TriangleMesh& mesh, const Vec3& factors)
{
    VertexField pos = mesh.positions();
    for (Eigen::Index i = 0; i < pos.rows(); ++i) pos.row(i) = pos.row(i).cwiseProduct(factors.transpose());
    if (factors.prod() < 0.0) return TriangleMesh(std::move(pos), mesh.triangles());
    return mesh.with_positions(std::move(pos));
}

TriangleMesh translated(const TriangleMesh& mesh, const Vec3& offset)
{
    VertexField pos = mesh.positions();
    pos.rowwise() += offset.transpose();
    return mesh.with_positions(std::move(pos));
}

TriangleMesh merged(const TriangleMesh& a, const TriangleMesh& b)
{
    VertexField pos(a.vertex_count() + b.vertex_count(), 3);
    pos << a.positions(), b.positions();
    std::vector<Tri> tris = a.triangles();
    for (Tri t : b.triangles()) {
        for (int& k : t) k += a.vertex_count();
        tris.push_back(t);
    }
    return TriangleMesh(std::move(pos), std::move(tris));
}

Eigen::SparseMatrix<double> cotan_laplacian(const TriangleMesh& mesh, bool clamp)
{
    const int nv = mesh.vertex_count();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.edges().size() * 4);
    auto cot_opposite = [&](int face, int a, int b) {
        const Tri& tri = mesh.triangles()[face];
        int c = tri[0];
        for (int k : tri)
            if (k != a && k != b) c = k;
        const Vec3 u = mesh.vertex(a) - mesh.vertex(c);
        const Vec3 v = mesh.vertex(b) - mesh.vertex(c);
        return u.dot(v) / u.cross(v).norm();
    };
    for (const Edge& e : mesh.edges()) {
        double w = 0.5 * (cot_opposite(e.f0, e.v0, e.v1) + cot_opposite(e.f1, e.v0, e.v1));
        if (clamp) w = std::max(w, 0.0);
        trips.emplace_back(e.v0, e.v1, -w);
        trips.emplace_back(e.v1, e.v0, -w);
        trips.emplace_back(e.v0, e.v0, w);
        trips.emplace_back(e.v1, e.v1, w);
    }
    Eigen::SparseMatrix<double> L(nv, nv);
    L.setFromTriplets(trips.begin(), trips.end());
    return L;
}

Eigen::SparseMatrix<double> mass_matrix(const TriangleMesh& mesh)
{
    const int nv = mesh.vertex_count();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.face_count() * 9);
    for (int t = 0; t < mesh.face_count(); ++t) {
        const Tri& tri = mesh.triangles()[t];
        const double a = mesh.areas()[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) trips.emplace_back(tri[i], tri[j], (i == j ? 2.0 : 1.0) * a / 12.0);
    }
    Eigen::SparseMatrix<double> M(nv, nv);
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

Eigen::SparseMatrix<double> averaging_operator(const TriangleMesh& mesh)
{
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.face_count() * 3);
    for (int t = 0; t < mesh.face_count(); ++t)
        for (int k : mesh.triangles()[t]) trips.emplace_back(t, k, mesh.areas()[t] / 3.0);
    Eigen::SparseMatrix<double> A(mesh.face_count(), mesh.vertex_count());
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

} // namespace scatter::mesh
