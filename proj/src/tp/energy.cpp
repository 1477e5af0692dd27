#include "scatter/tp/energy.hpp"

#include "scatter/error.hpp"

#include <cmath>
#include <vector>

namespace scatter::tp {

namespace {

bool share_vertex(const Tri& a, const Tri& b)
{
    for (int x : a)
        for (int y : b)
            if (x == y) return true;
    return false;
}

struct Faces {
    explicit Faces(const mesh::TriangleMesh& mesh)
        : count(mesh.face_count()), tris(mesh.triangles()), area(mesh.areas()), m(mesh.barycenters()),
          n(mesh.normals())
    {
    }
    int count;
    const std::vector<Tri>& tris;
    const FaceScalarField& area;
    const FaceVectorField& m;
    const FaceVectorField& n;
};

/// Pair term w = |<nu, d>|^p / |d|^(2p) * aa and the coefficients of its
/// derivatives: dw/dd = alpha nu - beta d, dw/dnu = alpha d.
struct PairTerm {
    double w, alpha, beta;
};

inline PairTerm pair_term(const Vec3& nu, const Vec3& d, double aa, double p)
{
    const double r2 = d.squaredNorm();
    const double c = nu.dot(d);
    const double cpm2 = std::pow(std::abs(c), p - 2.0);
    const double rinv = std::pow(r2, -p);
    const double w = cpm2 * c * c * rinv * aa;
    return {w, p * cpm2 * c * rinv * aa, 2.0 * p * w / r2};
}

} // namespace

void EnergyParams::validate() const
{
    if (!(p > 4.0) || !std::isfinite(p)) throw Error(ErrorKind::ConfigError, "tangent-point exponent p must exceed 4");
}

FaceScalarField tp_density(const mesh::TriangleMesh& mesh, const EnergyParams& params)
{
    params.validate();
    const Faces f(mesh);
    FaceScalarField out(f.count);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < f.count; ++i) {
        const Vec3 mi = f.m.row(i).transpose(), ni = f.n.row(i).transpose();
        double sum = 0.0;
        for (int j = 0; j < f.count; ++j) {
            if (j == i || (params.exclude_adjacent && share_vertex(f.tris[i], f.tris[j]))) continue;
            const Vec3 d = f.m.row(j).transpose() - mi;
            const double c = std::abs(ni.dot(d));
            sum += std::pow(c, params.p) * std::pow(d.squaredNorm(), -params.p) * f.area[j];
        }
        out[i] = sum;
    }
    return out;
}

double tp_energy(const mesh::TriangleMesh& mesh, const EnergyParams& params)
{
    const FaceScalarField rho = tp_density(mesh, params);
    return rho.dot(mesh.areas());
}

EnergyGradient tp_energy_gradient(const mesh::TriangleMesh& mesh, const EnergyParams& params)
{
    params.validate();
    const Faces f(mesh);
    const double p = params.p;
    FaceVectorField gm(f.count, 3), gn(f.count, 3);
    FaceScalarField ga(f.count), row_energy(f.count);

    // Each face collects every derivative that lands on its own barycenter, normal
    // and area, from both orderings of each pair, so rows never write to each other.
#pragma omp parallel for schedule(static)
    for (int i = 0; i < f.count; ++i) {
        const Vec3 mi = f.m.row(i).transpose(), ni = f.n.row(i).transpose();
        const double ai = f.area[i];
        Vec3 gmi = Vec3::Zero(), gni = Vec3::Zero();
        double gai = 0.0, e = 0.0;
        for (int j = 0; j < f.count; ++j) {
            if (j == i || (params.exclude_adjacent && share_vertex(f.tris[i], f.tris[j]))) continue;
            const Vec3 d = f.m.row(j).transpose() - mi;
            const Vec3 nj = f.n.row(j).transpose();
            const double aa = ai * f.area[j];
            const PairTerm out = pair_term(ni, d, aa, p);
            const PairTerm in = pair_term(nj, -d, aa, p);
            e += out.w;
            gmi -= out.alpha * ni - out.beta * d;
            gni += out.alpha * d;
            gmi += in.alpha * nj + in.beta * d;
            gai += (out.w + in.w) / ai;
        }
        gm.row(i) = gmi.transpose();
        gn.row(i) = gni.transpose();
        ga[i] = gai;
        row_energy[i] = e;
    }

    EnergyGradient result;
    result.value = row_energy.sum();
    result.gradient = VertexField::Zero(mesh.vertex_count(), 3);
    const auto& x = mesh.positions();
    for (int t = 0; t < f.count; ++t) {
        const Tri& tri = f.tris[t];
        const Vec3 x0 = x.row(tri[0]).transpose(), x1 = x.row(tri[1]).transpose(), x2 = x.row(tri[2]).transpose();
        const Vec3 e1 = x1 - x0, e2 = x2 - x0;
        const Vec3 nu = f.n.row(t).transpose();
        const double len = 2.0 * f.area[t];
        const Vec3 g = gn.row(t).transpose();
        // Area a = |N|/2 and normal nu = N/|N| for N = e1 x e2.
        const Vec3 gN = 0.5 * ga[t] * nu + (g - nu.dot(g) * nu) / len;
        const Vec3 g1 = e2.cross(gN), g2 = gN.cross(e1);
        const Vec3 gb = gm.row(t).transpose() / 3.0;
        result.gradient.row(tri[0]) += (gb - g1 - g2).transpose();
        result.gradient.row(tri[1]) += (gb + g1).transpose();
        result.gradient.row(tri[2]) += (gb + g2).transpose();
    }
    return result;
}

} // namespace scatter::tp
