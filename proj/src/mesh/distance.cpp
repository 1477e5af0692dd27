#include "scatter/mesh/distance.hpp"

#include "scatter/mesh/primitives.hpp"

#include <algorithm>

namespace scatter::mesh {

namespace {

std::vector<Box> face_boxes(const TriangleMesh& mesh)
{
    std::vector<Box> boxes(mesh.face_count());
    for (int t = 0; t < mesh.face_count(); ++t) {
        boxes[t].setEmpty();
        for (int k : mesh.triangles()[t]) boxes[t].extend(mesh.vertex(k));
    }
    return boxes;
}

double one_sided(const std::vector<Vec3>& samples, const SurfaceDistance& target)
{
    double h = 0.0;
    for (const Vec3& p : samples) h = std::max(h, target(p));
    return h;
}

} // namespace

SurfaceDistance::SurfaceDistance(const TriangleMesh& mesh) : mesh_(mesh), bvh_(face_boxes(mesh)) {}

double SurfaceDistance::operator()(const Vec3& p) const
{
    return bvh_.nearest(p, [&](int t) {
        const Tri& tri = mesh_.triangles()[t];
        return point_triangle_distance(p, mesh_.vertex(tri[0]), mesh_.vertex(tri[1]), mesh_.vertex(tri[2]));
    });
}

std::vector<Vec3> surface_samples(const TriangleMesh& mesh, int subdivisions)
{
    const int n = std::max(1, subdivisions);
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(mesh.face_count()) * ((n + 1) * (n + 2) / 2 + 1));
    for (int t = 0; t < mesh.face_count(); ++t) {
        const Tri& tri = mesh.triangles()[t];
        const Vec3 a = mesh.vertex(tri[0]), b = mesh.vertex(tri[1]), c = mesh.vertex(tri[2]);
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n - i; ++j) {
                const double u = double(i) / n, v = double(j) / n;
                out.push_back((1.0 - u - v) * a + u * b + v * c);
            }
        out.push_back((a + b + c) / 3.0);
    }
    return out;
}

double hausdorff_distance(const TriangleMesh& a, const TriangleMesh& b, const HausdorffOptions& options)
{
    const SurfaceDistance da(a), db(b);
    const double ab = one_sided(surface_samples(a, options.subdivisions), db);
    const double ba = one_sided(surface_samples(b, options.subdivisions), da);
    return std::max(ab, ba);
}

double relative_hausdorff_distance(const TriangleMesh& a, const TriangleMesh& b, const HausdorffOptions& options)
{
    return hausdorff_distance(a, b, options) / a.diameter();
}

double winding_number(const TriangleMesh& mesh, const Vec3& p)
{
    double w = 0.0;
    for (const Tri& t : mesh.triangles())
        w += winding_contribution(p, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
    return w;
}

double signed_distance(const TriangleMesh& reference, const Vec3& p)
{
    const SurfaceDistance dist(reference);
    const double d = dist(p);
    return winding_number(reference, p) > 0.5 ? -d : d;
}

Eigen::VectorXd signed_distance_field(const TriangleMesh& reference, const TriangleMesh& query)
{
    const SurfaceDistance dist(reference);
    Eigen::VectorXd out(query.vertex_count());
    for (int i = 0; i < query.vertex_count(); ++i) {
        const Vec3 p = query.vertex(i);
        const double d = dist(p);
        out[i] = winding_number(reference, p) > 0.5 ? -d : d;
    }
    return out;
}

} // namespace scatter::mesh
