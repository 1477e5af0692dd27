#include "scatter/bem/kernels.hpp"

#include "scatter/error.hpp"

#include <cmath>
#include <numbers>

namespace scatter::bem {

cplx fundamental_solution(const Vec3& x, const Vec3& y, double kappa)
{
    const double r = (x - y).norm();
    if (r == 0.0) throw Error(ErrorKind::CoincidentPoints, "fundamental solution evaluated at coincident points");
    return std::polar(1.0, kappa * r) / (4.0 * std::numbers::pi * r);
}

double singular_self_integral(const Vec3& a, const Vec3& b, const Vec3& c)
{
    const Vec3 cr = (b - a).cross(c - a);
    if (!(cr.norm() > 0.0)) throw Error(ErrorKind::DegenerateFace, "singular integral over a degenerate triangle");
    const Vec3 m = (a + b + c) / 3.0;
    const Vec3* v[3] = {&a, &b, &c};
    double total = 0.0;
    for (int k = 0; k < 3; ++k) {
        const Vec3& p = *v[k];
        const Vec3& q = *v[(k + 1) % 3];
        const Vec3 pq = q - p;
        const double len = pq.norm();
        // Distance from m to the edge line and the subtriangle angles at p and q.
        const double h = (p - m).cross(q - m).norm() / len;
        const double cos_p = pq.dot(m - p) / (len * (m - p).norm());
        const double cos_q = -pq.dot(m - q) / (len * (m - q).norm());
        total += h * (std::atanh(cos_p) + std::atanh(cos_q));
    }
    return total;
}

BemGeometry::BemGeometry(const mesh::TriangleMesh& mesh)
    : faces(mesh.face_count()), vertices(mesh.vertex_count()), positions(mesh.positions()), triangles(mesh.triangles())
{
    mx.resize(faces);
    my.resize(faces);
    mz.resize(faces);
    nx.resize(faces);
    ny.resize(faces);
    nz.resize(faces);
    area.resize(faces);
    self_integral.resize(faces);
    for (int t = 0; t < faces; ++t) {
        mx[t] = mesh.barycenters()(t, 0);
        my[t] = mesh.barycenters()(t, 1);
        mz[t] = mesh.barycenters()(t, 2);
        nx[t] = mesh.normals()(t, 0);
        ny[t] = mesh.normals()(t, 1);
        nz[t] = mesh.normals()(t, 2);
        area[t] = mesh.areas()[t];
        const Tri& tri = triangles[t];
        self_integral[t] = singular_self_integral(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
    }
    mass = mesh::mass_matrix(mesh);
    lumped_mass = Eigen::VectorXd::Zero(vertices);
    for (int t = 0; t < faces; ++t)
        for (int k : triangles[t]) lumped_mass[k] += area[t] / 3.0;
}

} // namespace scatter::bem
