#pragma once

#include "scatter/bem/solvers.hpp"

#include <optional>

namespace scatter::inverse {

struct ModelOptions {
    bem::BemSolveOptions forward{1e-6, 500, {}};
    bem::BemSolveOptions derivative{1e-2, 500, {}};
};

/// Far field of one shape together with its shape derivative and adjoint. The
/// normal derivative of the total field is solved on first use and shared by
/// every derivative application on this shape.
class ForwardModel {
public:
    /// Solves the forward problem unless `far_field` already holds it.
    ForwardModel(const mesh::TriangleMesh& mesh, const bem::WaveSet& waves, const bem::EvalGrid& grid,
                 const ModelOptions& options, std::optional<Eigen::MatrixXcd> far_field = std::nullopt);

    const mesh::TriangleMesh& mesh() const { return mesh_; }
    const bem::BemGeometry& geometry() const { return geo_; }
    const bem::WaveSet& waves() const { return waves_; }
    const bem::EvalGrid& grid() const { return grid_; }
    const Eigen::MatrixXcd& far_field() const { return far_; }
    const bem::Density& normal_derivative() const;

    /// Far field of the linearised problem with Dirichlet data -du/dnu <nu, v>,
    /// evaluated at face midpoints.
    Eigen::MatrixXcd apply_DF(const VertexField& v) const;

    /// Adjoint of apply_DF between the real part of the weighted far-field
    /// pairing (summed over waves) and the Euclidean pairing of vertex fields.
    VertexField apply_DF_adjoint(const Eigen::MatrixXcd& y) const;

    /// Number of GMRES solves that hit the iteration cap so far.
    int unconverged_solves() const { return unconverged_; }

private:
    const Eigen::MatrixXcd& face_normal_derivative() const;
    void record(const bem::DensitySolution& sol) const;

    mesh::TriangleMesh mesh_;
    bem::BemGeometry geo_;
    bem::WaveSet waves_;
    bem::EvalGrid grid_;
    ModelOptions options_;
    Eigen::MatrixXcd far_;
    mutable std::optional<bem::Density> dudn_;
    mutable std::optional<Eigen::MatrixXcd> face_dudn_;
    mutable int unconverged_ = 0;
};

} // namespace scatter::inverse
