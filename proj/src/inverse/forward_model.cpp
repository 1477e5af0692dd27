#include "scatter/inverse/forward_model.hpp"

#include "scatter/error.hpp"

namespace scatter::inverse {

ForwardModel::ForwardModel(const mesh::TriangleMesh& mesh, const bem::WaveSet& waves, const bem::EvalGrid& grid,
                           const ModelOptions& options, std::optional<Eigen::MatrixXcd> far_field)
    : mesh_(mesh), geo_(mesh), waves_(waves), grid_(grid), options_(options)
{
    if (far_field) {
        if (far_field->rows() != grid.size() || far_field->cols() != waves.wave_count())
            throw Error(ErrorKind::ShapeMismatch, "cached far field does not match grid x waves");
        far_ = std::move(*far_field);
        return;
    }
    std::vector<krylov::SolveReport> reports;
    far_ = bem::forward_far_field(geo_, waves_, grid_, options_.forward, &reports).values;
    for (const auto& r : reports) unconverged_ += r.converged ? 0 : 1;
}

void ForwardModel::record(const bem::DensitySolution& sol) const
{
    for (const auto& r : sol.reports) unconverged_ += r.converged ? 0 : 1;
}

const bem::Density& ForwardModel::normal_derivative() const
{
    if (!dudn_) {
        auto sol = bem::solve_direct(geo_, waves_, options_.forward);
        record(sol);
        dudn_ = std::move(sol.density);
    }
    return *dudn_;
}

const Eigen::MatrixXcd& ForwardModel::face_normal_derivative() const
{
    if (!face_dudn_) {
        Eigen::MatrixXcd f = bem::face_integrals(geo_, normal_derivative());
        for (int t = 0; t < geo_.faces; ++t) f.row(t) /= geo_.area[t];
        face_dudn_ = std::move(f);
    }
    return *face_dudn_;
}

Eigen::MatrixXcd ForwardModel::apply_DF(const VertexField& v) const
{
    if (v.rows() != geo_.vertices) throw Error(ErrorKind::ShapeMismatch, "vertex field does not match the mesh");
    const Eigen::MatrixXcd& lam = face_normal_derivative();
    Eigen::MatrixXcd data(geo_.faces, lam.cols());
    for (int t = 0; t < geo_.faces; ++t) {
        const Tri& tri = geo_.triangles[t];
        const Vec3 mean = (v.row(tri[0]) + v.row(tri[1]) + v.row(tri[2])).transpose() / 3.0;
        data.row(t) = -geo_.normal(t).dot(mean) * lam.row(t);
    }
    const auto sol = bem::solve_weak(geo_, waves_, bem::distribute_to_vertices(geo_, data), false, options_.derivative);
    record(sol);
    return bem::farfield_from_indirect(geo_, waves_, grid_, sol.density);
}

VertexField ForwardModel::apply_DF_adjoint(const Eigen::MatrixXcd& y) const
{
    const Eigen::MatrixXcd zeta = bem::farfield_indirect_adjoint(geo_, waves_, grid_, y);
    // The Galerkin matrix of the indirect equation has the conjugate of the direct
    // one as its conjugate transpose.
    const auto sol = bem::solve_weak(geo_, waves_, zeta.conjugate(), true, options_.derivative);
    record(sol);
    const Eigen::MatrixXcd mu = bem::face_integrals(geo_, sol.density.conjugate());
    const Eigen::MatrixXcd& lam = face_normal_derivative();
    VertexField out = VertexField::Zero(geo_.vertices, 3);
    for (int t = 0; t < geo_.faces; ++t) {
        double g = 0.0;
        for (Eigen::Index c = 0; c < mu.cols(); ++c) g += (std::conj(-lam(t, c)) * mu(t, c)).real();
        const Vec3 share = g / 3.0 * geo_.normal(t);
        for (int v : geo_.triangles[t]) out.row(v) += share.transpose();
    }
    return out;
}

} // namespace scatter::inverse
