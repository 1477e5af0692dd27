#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <complex>

namespace scatter {

using Vec3 = Eigen::Vector3d;
using Tri = std::array<int, 3>;
using cplx = std::complex<double>;

/// One 3-vector per vertex, stored row-major so that a field flattens to
/// (x0, y0, z0, x1, ...) without copies.
using VertexField = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using FaceVectorField = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using FaceScalarField = Eigen::VectorXd;

inline Eigen::Map<Eigen::VectorXd> flatten(VertexField& f)
{
    return {f.data(), f.size()};
}

inline Eigen::Map<const Eigen::VectorXd> flatten(const VertexField& f)
{
    return {f.data(), f.size()};
}

inline VertexField unflatten(const Eigen::VectorXd& x)
{
    return Eigen::Map<const VertexField>(x.data(), x.size() / 3, 3);
}

} // namespace scatter
