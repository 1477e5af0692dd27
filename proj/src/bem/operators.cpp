#include "scatter/bem/operators.hpp"

#include "scatter/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace scatter::bem {

namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * std::numbers::pi);

/// Kernel value split into real and imaginary parts.
struct KernelEval {
    double re;
    double im;
};

template <KernelKind Kind>
inline KernelEval off_diagonal(const BemGeometry& g, double kappa, double eta, int i, int j)
{
    const double dx = g.mx[j] - g.mx[i];
    const double dy = g.my[j] - g.my[i];
    const double dz = g.mz[j] - g.mz[i];
    const double r2 = dx * dx + dy * dy + dz * dz;
    const double r = std::sqrt(r2);
    const double inv_r = 1.0 / r;
    const double kr = kappa * r;
    // e^{ikr} / (4 pi r)
    const double base_re = std::cos(kr) * inv_r * kInv4Pi;
    const double base_im = std::sin(kr) * inv_r * kInv4Pi;
    // Multiplier c such that kernel = base * c.
    double c_re = 0.0, c_im = 0.0;
    if constexpr (Kind == KernelKind::SingleLayer) {
        c_re = 1.0;
    } else {
        double proj = 0.0;
        if constexpr (Kind == KernelKind::DoubleLayer || Kind == KernelKind::Combined)
            proj = (dx * g.nx[j] + dy * g.ny[j] + dz * g.nz[j]) / r2;
        else
            proj = -(dx * g.nx[i] + dy * g.ny[i] + dz * g.nz[i]) / r2;
        // (i k r - 1) * proj
        c_re = -proj;
        c_im = kr * proj;
        if constexpr (Kind == KernelKind::Combined || Kind == KernelKind::CombinedAdjoint) c_im -= eta;
    }
    return {base_re * c_re - base_im * c_im, base_re * c_im + base_im * c_re};
}

inline KernelEval diagonal(const BemGeometry& g, KernelKind kind, double kappa, double eta, int t)
{
    const double v_re = g.self_integral[t] * kInv4Pi / g.area[t];
    const double v_im = kappa * kInv4Pi;
    switch (kind) {
    case KernelKind::SingleLayer: return {v_re, v_im};
    case KernelKind::DoubleLayer:
    case KernelKind::AdjointDoubleLayer: return {0.0, 0.0};
    case KernelKind::Combined:
    case KernelKind::CombinedAdjoint: return {eta * v_im, -eta * v_re}; // -i eta V
    }
    return {0.0, 0.0};
}

template <KernelKind Kind>
inline KernelEval entry(const BemGeometry& g, double kappa, double eta, int i, int j)
{
    if (i == j) return diagonal(g, Kind, kappa, eta, i);
    return off_diagonal<Kind>(g, kappa, eta, i, j);
}

template <KernelKind Kind>
Eigen::MatrixXcd blocked(const BemGeometry& g, const KernelParams& p, const Eigen::MatrixXcd& rhs, int W)
{
    const int n = g.faces;
    const int D = static_cast<int>(rhs.cols());
    // Split the right-hand sides into contiguous real and imaginary parts.
    std::vector<double> xr(static_cast<std::size_t>(n) * D), xi(static_cast<std::size_t>(n) * D);
    for (int d = 0; d < D; ++d)
        for (int j = 0; j < n; ++j) {
            xr[static_cast<std::size_t>(d) * n + j] = rhs(j, d).real();
            xi[static_cast<std::size_t>(d) * n + j] = rhs(j, d).imag();
        }
    Eigen::MatrixXcd out(n, D);
    const int tiles = (n + W - 1) / W;

#pragma omp parallel
    {
        std::vector<double> tr(static_cast<std::size_t>(W) * W), ti(static_cast<std::size_t>(W) * W);
        std::vector<double> ar(static_cast<std::size_t>(W) * D), ai(static_cast<std::size_t>(W) * D);
#pragma omp for schedule(static)
        for (int rt = 0; rt < tiles; ++rt) {
            const int i0 = rt * W;
            const int i1 = std::min(n, i0 + W);
            std::fill(ar.begin(), ar.end(), 0.0);
            std::fill(ai.begin(), ai.end(), 0.0);
            for (int ct = 0; ct < tiles; ++ct) {
                const int j0 = ct * W;
                const int j1 = std::min(n, j0 + W);
                const int wj = j1 - j0;
                for (int i = i0; i < i1; ++i) {
                    double* rr = &tr[static_cast<std::size_t>(i - i0) * W];
                    double* ri = &ti[static_cast<std::size_t>(i - i0) * W];
                    for (int j = j0; j < j1; ++j) {
                        const KernelEval k = entry<Kind>(g, p.kappa, p.eta, i, j);
                        rr[j - j0] = k.re;
                        ri[j - j0] = k.im;
                    }
                }
                for (int d = 0; d < D; ++d) {
                    const double* br = &xr[static_cast<std::size_t>(d) * n + j0];
                    const double* bi = &xi[static_cast<std::size_t>(d) * n + j0];
                    for (int i = i0; i < i1; ++i) {
                        const double* rr = &tr[static_cast<std::size_t>(i - i0) * W];
                        const double* ri = &ti[static_cast<std::size_t>(i - i0) * W];
                        double sr = ar[static_cast<std::size_t>(d) * W + (i - i0)];
                        double si = ai[static_cast<std::size_t>(d) * W + (i - i0)];
                        for (int j = 0; j < wj; ++j) {
                            sr += rr[j] * br[j] - ri[j] * bi[j];
                            si += rr[j] * bi[j] + ri[j] * br[j];
                        }
                        ar[static_cast<std::size_t>(d) * W + (i - i0)] = sr;
                        ai[static_cast<std::size_t>(d) * W + (i - i0)] = si;
                    }
                }
            }
            for (int d = 0; d < D; ++d)
                for (int i = i0; i < i1; ++i)
                    out(i, d) = {ar[static_cast<std::size_t>(d) * W + (i - i0)], ai[static_cast<std::size_t>(d) * W + (i - i0)]};
        }
    }
    return out;
}

template <KernelKind Kind>
Eigen::MatrixXcd naive(const BemGeometry& g, const KernelParams& p, const Eigen::MatrixXcd& rhs)
{
    const int n = g.faces;
    Eigen::MatrixXcd out(n, rhs.cols());
    for (Eigen::Index d = 0; d < rhs.cols(); ++d)
        for (int i = 0; i < n; ++i) {
            double sr = 0.0, si = 0.0;
            for (int j = 0; j < n; ++j) {
                const KernelEval k = entry<Kind>(g, p.kappa, p.eta, i, j);
                const double br = rhs(j, d).real(), bi = rhs(j, d).imag();
                sr += k.re * br - k.im * bi;
                si += k.re * bi + k.im * br;
            }
            out(i, d) = {sr, si};
        }
    return out;
}

void check_faces(const BemGeometry& g, const Eigen::MatrixXcd& x)
{
    if (x.rows() != g.faces)
        throw Error(ErrorKind::ShapeMismatch, "face block has " + std::to_string(x.rows()) + " rows, mesh has " +
                                                  std::to_string(g.faces) + " faces");
}

KernelKind kind_of(LayerOperator which)
{
    switch (which) {
    case LayerOperator::V: return KernelKind::SingleLayer;
    case LayerOperator::K: return KernelKind::DoubleLayer;
    case LayerOperator::Kprime: return KernelKind::AdjointDoubleLayer;
    }
    return KernelKind::SingleLayer;
}

} // namespace

cplx face_kernel(const BemGeometry& geo, const KernelParams& p, int i, int j)
{
    KernelEval k{};
    switch (p.kind) {
    case KernelKind::SingleLayer: k = entry<KernelKind::SingleLayer>(geo, p.kappa, p.eta, i, j); break;
    case KernelKind::DoubleLayer: k = entry<KernelKind::DoubleLayer>(geo, p.kappa, p.eta, i, j); break;
    case KernelKind::AdjointDoubleLayer: k = entry<KernelKind::AdjointDoubleLayer>(geo, p.kappa, p.eta, i, j); break;
    case KernelKind::Combined: k = entry<KernelKind::Combined>(geo, p.kappa, p.eta, i, j); break;
    case KernelKind::CombinedAdjoint: k = entry<KernelKind::CombinedAdjoint>(geo, p.kappa, p.eta, i, j); break;
    }
    return {k.re, k.im};
}

Eigen::MatrixXcd blocked_multiwave_product(const BemGeometry& geo, const KernelParams& p, const Eigen::MatrixXcd& rhs,
                                           const BlockOptions& options)
{
    check_faces(geo, rhs);
    if (rhs.cols() > options.max_rhs)
        throw Error(ErrorKind::BlockTooWide, std::to_string(rhs.cols()) + " right-hand sides exceed the block width " +
                                                 std::to_string(options.max_rhs));
    if (options.tile < 1) throw Error(ErrorKind::ConfigError, "tile width must be positive");
    switch (p.kind) {
    case KernelKind::SingleLayer: return blocked<KernelKind::SingleLayer>(geo, p, rhs, options.tile);
    case KernelKind::DoubleLayer: return blocked<KernelKind::DoubleLayer>(geo, p, rhs, options.tile);
    case KernelKind::AdjointDoubleLayer: return blocked<KernelKind::AdjointDoubleLayer>(geo, p, rhs, options.tile);
    case KernelKind::Combined: return blocked<KernelKind::Combined>(geo, p, rhs, options.tile);
    case KernelKind::CombinedAdjoint: return blocked<KernelKind::CombinedAdjoint>(geo, p, rhs, options.tile);
    }
    return {};
}

Eigen::MatrixXcd naive_product(const BemGeometry& geo, const KernelParams& p, const Eigen::MatrixXcd& rhs)
{
    check_faces(geo, rhs);
    switch (p.kind) {
    case KernelKind::SingleLayer: return naive<KernelKind::SingleLayer>(geo, p, rhs);
    case KernelKind::DoubleLayer: return naive<KernelKind::DoubleLayer>(geo, p, rhs);
    case KernelKind::AdjointDoubleLayer: return naive<KernelKind::AdjointDoubleLayer>(geo, p, rhs);
    case KernelKind::Combined: return naive<KernelKind::Combined>(geo, p, rhs);
    case KernelKind::CombinedAdjoint: return naive<KernelKind::CombinedAdjoint>(geo, p, rhs);
    }
    return {};
}

Eigen::MatrixXcd face_integrals(const BemGeometry& geo, const Eigen::MatrixXcd& vertex_values)
{
    if (vertex_values.rows() != geo.vertices) throw Error(ErrorKind::ShapeMismatch, "density length differs from vertex count");
    Eigen::MatrixXcd out(geo.faces, vertex_values.cols());
    for (int t = 0; t < geo.faces; ++t) {
        const Tri& tri = geo.triangles[t];
        out.row(t) = (geo.area[t] / 3.0) *
                     (vertex_values.row(tri[0]) + vertex_values.row(tri[1]) + vertex_values.row(tri[2]));
    }
    return out;
}

Eigen::MatrixXcd distribute_to_vertices(const BemGeometry& geo, const Eigen::MatrixXcd& face_values)
{
    check_faces(geo, face_values);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(geo.vertices, face_values.cols());
    for (int t = 0; t < geo.faces; ++t)
        for (int k : geo.triangles[t]) out.row(k) += (geo.area[t] / 3.0) * face_values.row(t);
    return out;
}

Eigen::MatrixXcd apply_mass(const BemGeometry& geo, const Eigen::MatrixXcd& v)
{
    if (v.rows() != geo.vertices) throw Error(ErrorKind::ShapeMismatch, "density length differs from vertex count");
    const Eigen::MatrixXd re = geo.mass * v.real();
    const Eigen::MatrixXd im = geo.mass * v.imag();
    Eigen::MatrixXcd out(v.rows(), v.cols());
    out.real() = re;
    out.imag() = im;
    return out;
}

Density apply_layer_operators(const BemGeometry& geo, const WaveSet& waves, const Density& densities,
                              LayerOperator which, const BlockOptions& options)
{
    if (densities.rows() != geo.vertices || densities.cols() != waves.wave_count())
        throw Error(ErrorKind::ShapeMismatch, "density block does not match vertices x waves");
    Density out(densities.rows(), densities.cols());
    for (int g = 0; g < static_cast<int>(waves.groups.size()); ++g) {
        const auto& grp = waves.groups[g];
        const int off = waves.column_offset(g);
        const int cnt = static_cast<int>(grp.directions.size());
        const KernelParams params{kind_of(which), grp.kappa, grp.eta};
        for (int c0 = 0; c0 < cnt; c0 += options.max_rhs) {
            const int c = std::min(options.max_rhs, cnt - c0);
            const Eigen::MatrixXcd faces = face_integrals(geo, densities.middleCols(off + c0, c));
            out.middleCols(off + c0, c) = distribute_to_vertices(geo, blocked_multiwave_product(geo, params, faces, options));
        }
    }
    return out;
}

Density apply_layer_operators(const mesh::TriangleMesh& mesh, const WaveSet& waves, const Density& densities,
                              LayerOperator which, const BlockOptions& options)
{
    return apply_layer_operators(BemGeometry(mesh), waves, densities, which, options);
}

Eigen::MatrixXcd apply_boundary_operator(const BemGeometry& geo, double kappa, double eta, bool adjoint,
                                         const Eigen::MatrixXcd& densities, const BlockOptions& options)
{
    const KernelParams params{adjoint ? KernelKind::CombinedAdjoint : KernelKind::Combined, kappa, eta};
    Eigen::MatrixXcd out = 0.5 * apply_mass(geo, densities);
    for (Eigen::Index c0 = 0; c0 < densities.cols(); c0 += options.max_rhs) {
        const Eigen::Index c = std::min<Eigen::Index>(options.max_rhs, densities.cols() - c0);
        const Eigen::MatrixXcd faces = face_integrals(geo, densities.middleCols(c0, c));
        out.middleCols(c0, c) += distribute_to_vertices(geo, blocked_multiwave_product(geo, params, faces, options));
    }
    return out;
}

} // namespace scatter::bem
