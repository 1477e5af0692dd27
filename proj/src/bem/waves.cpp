#include "scatter/bem/waves.hpp"

#include "scatter/error.hpp"
#include "scatter/mesh/triangle_mesh.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace scatter::bem {

int WaveSet::wave_count() const
{
    int n = 0;
    for (const auto& g : groups) n += static_cast<int>(g.directions.size());
    return n;
}

int WaveSet::column_offset(int g) const
{
    int n = 0;
    for (int k = 0; k < g; ++k) n += static_cast<int>(groups[k].directions.size());
    return n;
}

void WaveSet::validate() const
{
    if (groups.empty()) throw Error(ErrorKind::ConfigError, "wave set has no wavenumbers");
    for (const auto& g : groups) {
        if (!(g.kappa > 0.0)) throw Error(ErrorKind::ConfigError, "wavenumber must be positive");
        if (!(g.eta > 0.0)) throw Error(ErrorKind::ConfigError, "coupling parameter must be positive");
        if (g.directions.empty()) throw Error(ErrorKind::ConfigError, "wavenumber without incident directions");
        for (const Vec3& d : g.directions)
            if (!(std::abs(d.norm() - 1.0) <= 1e-12))
                throw Error(ErrorKind::ConfigError, "incident direction is not unit length");
    }
}

WaveSet WaveSet::single(double kappa, std::vector<Vec3> directions, double eta)
{
    WaveSet w;
    w.groups.push_back({kappa, eta > 0.0 ? eta : kappa, std::move(directions)});
    return w;
}

void EvalGrid::validate() const
{
    if (points.rows() == 0 || weights.size() != points.rows())
        throw Error(ErrorKind::ShapeMismatch, "evaluation grid points and weights differ in length");
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        if (!(std::abs(points.row(i).norm() - 1.0) <= 1e-12))
            throw Error(ErrorKind::ConfigError, "evaluation point is not on the unit sphere");
    if (!(std::abs(weights.sum() - 4.0 * std::numbers::pi) <= 1e-9 * 4.0 * std::numbers::pi))
        throw Error(ErrorKind::ConfigError, "evaluation weights do not sum to 4 pi");
}

EvalGrid EvalGrid::icosphere(int level)
{
    const mesh::TriangleMesh s = mesh::icosphere(level);
    EvalGrid g;
    g.points = s.positions();
    for (Eigen::Index i = 0; i < g.points.rows(); ++i) g.points.row(i).normalize();
    g.weights = Eigen::VectorXd::Constant(g.points.rows(), 4.0 * std::numbers::pi / double(g.points.rows()));
    return g;
}

cplx farfield_inner(const EvalGrid& grid, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
    if (a.size() != grid.size() || b.size() != grid.size())
        throw Error(ErrorKind::ShapeMismatch, "far-field column length differs from grid size");
    cplx s = 0.0;
    for (int j = 0; j < grid.size(); ++j) s += grid.weights[j] * std::conj(a[j]) * b[j];
    return s;
}

double farfield_real_inner(const EvalGrid& grid, const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(ErrorKind::ShapeMismatch, "far-field shapes differ");
    double s = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) s += farfield_inner(grid, a.col(c), b.col(c)).real();
    return s;
}

double farfield_norm(const EvalGrid& grid, const Eigen::MatrixXcd& values)
{
    return std::sqrt(std::max(0.0, farfield_real_inner(grid, values, values)));
}

} // namespace scatter::bem
