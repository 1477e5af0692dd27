#pragma once

#include "scatter/tp/energy.hpp"

#include <Eigen/SparseCholesky>

#include <memory>

namespace scatter::tp {

/// Hat-function gradients per face: row k of entry t is the gradient on face t
/// of the hat function at the face's k-th vertex.
std::vector<Eigen::Matrix3d> hat_gradients(const mesh::TriangleMesh& mesh);

/// Symmetric positive semidefinite bilinear form on vertex fields acting the same
/// way on each coordinate. The scalar part is a sum of a fractional Gagliardo form
/// of the face differentials and a curvature-weighted form of the face averages.
class MetricOperator {
public:
    MetricOperator(const mesh::TriangleMesh& mesh, const EnergyParams& params);

    /// |V| x |V| matrix of the scalar form.
    const Eigen::MatrixXd& scalar_matrix() const { return k_; }
    int vertex_count() const { return static_cast<int>(k_.rows()); }

    VertexField apply(const VertexField& u) const;
    /// The same operator on a flattened (x0, y0, z0, x1, ...) vector.
    Eigen::VectorXd apply_flat(const Eigen::VectorXd& u) const;
    double pair(const VertexField& u, const VertexField& w) const;

private:
    Eigen::MatrixXd k_;
};

inline MetricOperator assemble_metric(const mesh::TriangleMesh& mesh, const EnergyParams& params = {})
{
    return MetricOperator(mesh, params);
}

/// Approximate inverse of the metric: L^-1 B L^-1, with L the clamped cotan
/// Laplacian shifted by a small multiple of the mass matrix and B the face-pair
/// form of order 2 - s. Throws FactorizationFailed.
class Preconditioner {
public:
    Preconditioner(const mesh::TriangleMesh& mesh, const EnergyParams& params);

    VertexField apply(const VertexField& r) const;
    Eigen::VectorXd apply_flat(const Eigen::VectorXd& r) const;
    Eigen::VectorXd apply_scalar(const Eigen::VectorXd& r) const;

    const Eigen::SparseMatrix<double>& mass() const { return mass_; }

private:
    Eigen::SparseMatrix<double> mass_;
    std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> factor_;
    Eigen::MatrixXd b_;
};

} // namespace scatter::tp
